#pragma once

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace brwspdc {

// Sweep kernels take an Execution tag. `serial` is the reference path the
// tests compare against; `parallel` distributes independent grid points over
// OpenMP threads. Each point is computed by the same pure function in both
// paths, so results are bit-identical.
enum class Execution { serial, parallel };

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Evaluates f(0..n-1) into a vector. If any call throws, the exception of the
/// lowest failing index is rethrown after all points finish, independent of
/// thread scheduling.
template <class F>
auto map_indices(Execution exec, std::size_t n, F&& f)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using T = std::invoke_result_t<F&, std::size_t>;
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);

  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
    for (long long i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        out[k] = f(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace brwspdc
