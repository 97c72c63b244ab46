#include <catch_amalgamated.hpp>

#include <stdexcept>
#include <string>

#include "brwspdc/execution.hpp"

using namespace brwspdc;

TEST_CASE("map_indices preserves order", "[execution]") {
  for (auto exec : {Execution::serial, Execution::parallel}) {
    const auto out = map_indices(exec, 1000, [](std::size_t k) { return static_cast<double>(k) * 0.5; });
    REQUIRE(out.size() == 1000);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == 0.5 * static_cast<double>(k));
  }
  CHECK(map_indices(Execution::parallel, 0, [](std::size_t) { return 1; }).empty());
}

TEST_CASE("map_indices rethrows the lowest failing index", "[execution]") {
  for (auto exec : {Execution::serial, Execution::parallel}) {
    try {
      map_indices(exec, 200, [](std::size_t k) -> int {
        if (k % 37 == 36) throw std::runtime_error("bad " + std::to_string(k));
        return 0;
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "bad 36");
    }
  }
}

TEST_CASE("worker count is positive", "[execution]") { CHECK(worker_count() >= 1); }
