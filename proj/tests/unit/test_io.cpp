#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <limits>
#include <sstream>

#include "brwspdc/errors.hpp"
#include "test_support.hpp"

using namespace brwspdc;

namespace {

const char* kMaterials = R"({"materials": [
  {"name": "hi", "al_fraction": 0.0, "dispersion_params": {"A": 5.0}, "valid_range_nm": [300, 3000], "d33_pm_per_V": 10},
  {"name": "lo", "al_fraction": 0.5, "dispersion_params": {"A": 4.0, "B1": 0.1, "C1_um": 0.2}, "valid_range_nm": [300, 3000]}
]})";

const char* kStack = R"({
  "name": "toy", "polarization": "te",
  "core": {"material": "hi", "thickness_nm": 500},
  "bilayer": [{"material": "lo", "thickness_nm": 100}, {"material": "hi", "thickness_nm": 200}],
  "n_bilayers": 3, "exterior": "lo", "qpm_period_um": 4.5,
  "modes": {"idler": {"kind": "BRW", "parity": "odd"}, "signal": {"kind": "TIR", "order": 2}}
})";

}  // namespace

TEST_CASE("materials file parsing", "[io]") {
  const auto lib = parse_materials(kMaterials);
  CHECK(lib.names() == std::vector<std::string>{"hi", "lo"});
  CHECK(lib.get("hi")->index(1000.0) == Catch::Approx(std::sqrt(5.0)));
  CHECK(lib.get("hi")->d33() == 10.0);
  CHECK(lib.get("lo")->d33() == 0.0);

  CHECK_THROWS_AS(parse_materials("{"), ConfigError);
  CHECK_THROWS_AS(parse_materials(R"({"materials": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_materials(R"({"materials": [{"name": "x"}]})"), ConfigError);
  CHECK_THROWS_AS(parse_materials(R"({"materials": [{"name": "x", "al_fraction": 0, "dispersion_params": {"A": "big"}, "valid_range_nm": [1, 2]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_materials(R"({"materials": [{"name": "x", "al_fraction": 0, "dispersion_params": {"A": 4}, "valid_range_nm": [5]}]})"),
                  ConfigError);
}

TEST_CASE("stack file parsing", "[io]") {
  const auto lib = parse_materials(kMaterials);
  const auto d = parse_device(kStack, lib);
  CHECK(d.stack.name == "toy");
  CHECK(d.pol == Polarization::TE);
  CHECK(d.stack.core.thickness_nm == 500.0);
  CHECK(d.stack.bilayer[1].material->name() == "hi");
  CHECK(d.stack.n_bilayers == 3);
  CHECK(d.period_um() == 4.5);
  REQUIRE(d.nominal_qpm_period_um);
  CHECK(*d.nominal_qpm_period_um == 4.5);
  CHECK(!d.qpm_design_point);
  CHECK(d.idler.kind == ModeKind::BRW);
  CHECK(d.idler.parity == Parity::odd);
  CHECK(d.signal.order == 2);
  CHECK(d.pump.kind == ModeKind::TIR);

  std::string bad = kStack;
  bad.replace(bad.find("\"lo\", \"thickness_nm\": 100"), 4, "\"zz\"");
  CHECK_THROWS_AS(parse_device(bad, lib), ConfigError);
  CHECK_THROWS_AS(parse_device(R"({"name": "x"})", lib), ConfigError);
  CHECK_THROWS_AS(load_device("/nonexistent/stack.json", lib), ConfigError);
}

TEST_CASE("shipped presets load", "[io]") {
  for (const char* name : {"brw-paper", "conventional-paper"}) {
    const auto path = resolve_stack_path(name);
    CHECK(path.filename() == std::string(name) + ".json");
    const auto d = load_device(path, testsupport::library());
    CHECK(d.pol == Polarization::TM);
    CHECK(d.stack.n_bilayers == 12);
    REQUIRE(d.qpm_design_point);
    CHECK(d.qpm_design_point->first == 800.0);
    CHECK(d.qpm_design_point->second == 1550.0);
  }
  CHECK(resolve_stack_path("dir/x.json") == std::filesystem::path("dir/x.json"));
  CHECK(resolve_stack_path("y.json") == std::filesystem::path("y.json"));
}

TEST_CASE("materials path override", "[io]") {
  ::setenv("BRWSPDC_MATERIALS", "/tmp/elsewhere.json", 1);
  CHECK(default_materials_path() == std::filesystem::path("/tmp/elsewhere.json"));
  ::unsetenv("BRWSPDC_MATERIALS");
  CHECK(default_materials_path() == default_data_dir() / "materials.json");
}

TEST_CASE("csv output", "[io]") {
  std::ostringstream os;
  CsvWriter w(os);
  w.comment("length_mm", 15.0);
  w.comment("stack", "brw-paper");
  w.header({"a", "b"});
  w.row({format_number(0.1), format_number(std::numeric_limits<double>::quiet_NaN())});
  CHECK(os.str() == "# length_mm = 15\n# stack = brw-paper\na,b\n0.1,nan\n");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.273e8) == "227300000");
}
