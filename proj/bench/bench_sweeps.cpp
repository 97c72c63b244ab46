#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brwspdc/execution.hpp"
#include "brwspdc/io.hpp"
#include "brwspdc/phasematch.hpp"
#include "brwspdc/spdc.hpp"

using namespace brwspdc;

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= n; ++k) g.push_back(lo + k * step);
  return g;
}

template <class F>
double best_of(int repeat, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != b[k] && !(a[k] != a[k] && b[k] != b[k])) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timing of the sweep kernels"};
  std::string stack = "brw-paper";
  int repeat = 3;
  double step = 0.1;
  app.add_option("--stack", stack, "Preset name or path");
  app.add_option("--repeat", repeat, "Timed runs per kernel (best is reported)")->check(CLI::PositiveNumber);
  app.add_option("--step", step, "Grid step in nm")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const auto lib = load_materials(default_data_dir() / "materials.json");
  auto dev = load_device(resolve_stack_path(stack), lib);
  resolve_qpm_period(dev);

  const auto pump_grid = grid(788.0, 812.0, step);
  const auto signal_grid = grid(1510.0, 1590.0, step);
  const auto idler_grid = grid(1600.0, 1700.0, step);

  struct Kernel {
    std::string name;
    std::size_t points;
    std::function<std::vector<double>(Execution)> run;
  };
  const std::vector<Kernel> kernels = {
      {"dispersion", idler_grid.size(),
       [&](Execution e) {
         return build_dispersion(dev.stack, dev.pol, dev.idler, idler_grid, {}, {2e-3, e}).n_eff;
       }},
      {"pump_sweep", pump_grid.size(),
       [&](Execution e) {
         SpdcConfig c;
         c.exec = e;
         return pump_sweep(dev, c, 1550.0, pump_grid).density;
       }},
      {"signal_sweep", signal_grid.size(),
       [&](Execution e) {
         SpdcConfig c;
         c.exec = e;
         return signal_sweep(dev, c, 800.0, signal_grid).density;
       }},
  };

  std::printf("stack %s, %d worker thread(s), best of %d\n", dev.stack.name.c_str(), worker_count(), repeat);
  std::printf("%-14s %7s %11s %11s %8s %10s\n", "kernel", "points", "serial_s", "parallel_s", "speedup", "identical");
  bool all_same = true;
  for (const auto& k : kernels) {
    std::vector<double> a, b;
    const double ts = best_of(repeat, [&] { a = k.run(Execution::serial); });
    const double tp = best_of(repeat, [&] { b = k.run(Execution::parallel); });
    const bool ok = same(a, b);
    all_same = all_same && ok;
    std::printf("%-14s %7zu %11.4f %11.4f %8.2f %10s\n", k.name.c_str(), k.points, ts, tp, ts / tp,
                ok ? "yes" : "NO");
  }
  return all_same ? 0 : 1;
}
