#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <regex>

#include "brwspdc/errors.hpp"
#include "test_support.hpp"

using namespace brwspdc;
using Catch::Approx;
using testsupport::grid;
using testsupport::preset;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double beta(const Device& d, Role role, double lam) {
  return kTwoPi * mode_index(d, role, lam) / lam * 1000.0;
}

Device slab_device(ModeFamily pump, double core_nm = 700.0) {
  Device d;
  d.stack = testsupport::slab(2.30, 2.00, core_nm);
  d.pol = Polarization::TE;
  d.pump = pump;
  return d;
}

}  // namespace

TEST_CASE("idler wavelength", "[phasematch]") {
  CHECK(std::abs(idler_wavelength(800.0, 1550.0) - 1653.3333333333333) < 1e-9);
  CHECK(idler_wavelength(775.0, 1550.0) == Approx(1550.0).epsilon(1e-15));
  CHECK(idler_wavelength(800.0, 1600.0) == Approx(1600.0).epsilon(1e-15));
  CHECK_THROWS_AS(idler_wavelength(800.0, 800.0), DomainError);
  CHECK_THROWS_AS(idler_wavelength(800.0, 700.0), DomainError);
  CHECK_THROWS_AS(idler_wavelength(0.0, 700.0), DomainError);
}

TEST_CASE("dispersion curves", "[phasematch]") {
  const auto dev = preset("conventional-paper");

  SECTION("single point") {
    const auto c = build_dispersion(dev.stack, dev.pol, dev.pump, {800.0});
    REQUIRE(c.n_eff.size() == 1);
    CHECK(c.n_eff[0] == mode_index(dev, Role::pump, 800.0));
  }

  SECTION("beta decreases and matches fresh solves") {
    const auto g = grid(790.0, 810.0, 1.0);
    const auto c = build_dispersion(dev.stack, dev.pol, dev.pump, g);
    REQUIRE(c.beta_rad_per_um.size() == g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(c.beta_rad_per_um[k] > 0.0);
      if (k) CHECK(c.beta_rad_per_um[k] < c.beta_rad_per_um[k - 1]);
    }
    for (std::size_t k : {0u, 7u, 20u}) {
      CHECK(std::abs(c.n_eff[k] - solve_mode(dev.stack, g[k], dev.pol, dev.pump).n_eff) < 1e-10);
    }
  }

  SECTION("refined grid interpolates the coarse curve") {
    const auto brw = preset("brw-paper");
    const auto coarse = build_dispersion(brw.stack, brw.pol, brw.idler, grid(1640.0, 1670.0, 1.0));
    const auto fine = build_dispersion(brw.stack, brw.pol, brw.idler, grid(1640.0, 1670.0, 0.5));
    for (std::size_t k = 1; k + 1 < fine.lambda_nm.size(); k += 2) {
      const double mid = 0.5 * (coarse.n_eff[k / 2] + coarse.n_eff[k / 2 + 1]);
      CHECK(std::abs(fine.n_eff[k] - mid) < 1e-6);
    }
  }

  SECTION("serial and parallel builds are identical") {
    const auto g = grid(795.0, 805.0, 0.5);
    const auto a = build_dispersion(dev.stack, dev.pol, dev.pump, g, {}, {2e-3, Execution::serial});
    const auto b = build_dispersion(dev.stack, dev.pol, dev.pump, g, {}, {2e-3, Execution::parallel});
    CHECK(a.n_eff == b.n_eff);
  }

  SECTION("losing the family reports the last good point") {
    const auto brw = preset("brw-paper");
    // Walk toward the short-wavelength edge of the stop band.
    std::vector<double> g;
    for (double lam = 1200.0; lam >= 1100.0; lam -= 2.0) g.push_back(lam);
    try {
      build_dispersion(brw.stack, brw.pol, brw.idler, g);
      FAIL("expected a lost-mode error");
    } catch (const NotFoundError& e) {
      const std::string msg = e.what();
      INFO(msg);
      std::smatch m;
      REQUIRE(std::regex_search(msg, m, std::regex(R"(lost mode family BRW/even at (\d+) nm \(last good point (\d+) nm\))")));
      CHECK(std::stod(m[2]) - std::stod(m[1]) == 2.0);
      CHECK(std::stod(m[1]) < 1200.0);
    }
  }
}

TEST_CASE("QPM period", "[phasematch]") {
  SECTION("closed form from the solved indices") {
    const auto d = slab_device({ModeKind::TIR, Parity::even, 0});
    const auto q = qpm_period(d, 800.0, 1550.0);
    const double ni = mode_index(d, Role::idler, q.lambda_i_nm);
    CHECK(q.n_i == ni);
    const double inv = q.n_p / 0.8 - q.n_s / 1.55 - ni / (q.lambda_i_nm * 1e-3);
    CHECK(q.period_um == Approx(1.0 / inv).epsilon(1e-12));
    CHECK(std::abs(q.delta_beta) < 1e-12);
    CHECK(std::abs(1.0 / q.lambda_p_nm - 1.0 / q.lambda_s_nm - 1.0 / q.lambda_i_nm) < 1e-12);
  }

  SECTION("non-positive mismatch has no first-order period") {
    const auto d = slab_device({ModeKind::TIR, Parity::even, 2}, 1500.0);
    const double k = beta(d, Role::pump, 800.0) - beta(d, Role::signal, 1550.0) -
                     beta(d, Role::idler, idler_wavelength(800.0, 1550.0));
    REQUIRE(k <= 0.0);
    CHECK_THROWS_AS(qpm_period(d, 800.0, 1550.0), DomainError);
  }

  SECTION("preset period re-validates the QPM condition") {
    const auto dev = preset("brw-paper");
    const auto q = qpm_period(dev, 800.0, 1550.0);
    CHECK(q.period_um == Approx(2.77).margin(0.15));
    CHECK(std::abs(phase_mismatch(dev, 800.0, 1550.0, q.period_um)) < 1e-10);
  }
}

TEST_CASE("mismatch curve derivative is its own finite difference", "[phasematch]") {
  for (const char* name : {"conventional-paper", "brw-paper"}) {
    const auto dev = preset(name);
    const auto g = grid(795.0, 805.0, 0.5);
    const auto c = pump_idler_mismatch_curve(dev, g, 1550.0);
    REQUIRE(c.derivative.size() == g.size());
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
      const double fd = (c.beta_diff[k + 1] - c.beta_diff[k - 1]) / 1.0;
      CHECK(c.derivative[k] == Approx(fd).epsilon(1e-12).margin(1e-15));
    }
    const auto par = pump_idler_mismatch_curve(dev, g, 1550.0, Execution::parallel);
    CHECK(par.beta_diff == c.beta_diff);
  }
  CHECK_THROWS_AS(pump_idler_mismatch_curve(preset("brw-paper"), {800.0, 801.0, 803.0}, 1550.0),
                  PreconditionError);
}

TEST_CASE("tuning curve re-validates its defining equations", "[phasematch]") {
  const auto dev = preset("brw-paper");
  const auto c = tuning_curve(dev, dev.period_um(), {793.0, 800.0, 806.0});
  REQUIRE(c.points.size() == 3);
  CHECK(c.gaps_nm.empty());
  for (const auto& p : c.points) {
    CHECK(std::abs(phase_mismatch(dev, p.lambda_p_nm, p.lambda_s_nm, dev.period_um())) < 1e-8);
    CHECK(std::abs(1.0 / p.lambda_p_nm - 1.0 / p.lambda_s_nm - 1.0 / p.lambda_i_nm) < 1e-12);
  }
  CHECK_THROWS_AS(tuning_curve(dev, -1.0, {800.0}), DomainError);
}

TEST_CASE("signal shift follows the pump-idler mismatch along the tuning curve", "[phasematch]") {
  const auto dev = preset("brw-paper");
  const double period = dev.period_um();
  const double h = 0.1;
  const auto fig2 = pump_idler_mismatch_curve(dev, grid(790.0, 810.0, 0.5), 1550.0);
  REQUIRE(fig2.zero_crossing_nm);

  auto along = [&](double lp) {
    const auto up = phase_matched_signal(dev, period, lp + h);
    const auto dn = phase_matched_signal(dev, period, lp - h);
    const double dbs = (beta(dev, Role::signal, up.lambda_s_nm) - beta(dev, Role::signal, dn.lambda_s_nm)) / (2 * h);
    const double dpi = ((beta(dev, Role::pump, lp + h) - beta(dev, Role::idler, up.lambda_i_nm)) -
                        (beta(dev, Role::pump, lp - h) - beta(dev, Role::idler, dn.lambda_i_nm))) /
                       (2 * h);
    return std::tuple{dbs, dpi, (up.lambda_s_nm - dn.lambda_s_nm) / (2 * h)};
  };

  const auto [bs_lo, pi_lo, slope_lo] = along(793.0);
  const auto [bs_hi, pi_hi, slope_hi] = along(806.0);
  CHECK(bs_lo == Approx(pi_lo).epsilon(0.02));
  CHECK(bs_hi == Approx(pi_hi).epsilon(0.02));

  const auto [bs_0, pi_0, slope_0] = along(*fig2.zero_crossing_nm);
  INFO("dls/dlp: " << slope_lo << " " << slope_0 << " " << slope_hi);
  CHECK(std::abs(slope_lo) >= 10.0 * std::abs(slope_0));
  CHECK(std::abs(slope_hi) >= 10.0 * std::abs(slope_0));
}

TEST_CASE("quarter-wave design", "[phasematch]") {
  const double lam = 1653.3333333333333;
  SECTION("closed form and scaling") {
    const auto a = quarter_wave_design(lam, 1.8, 2.2, 2.0);
    const auto b = quarter_wave_design(2.0 * lam, 1.8, 2.2, 2.0);
    CHECK(b.d1_nm == Approx(2.0 * a.d1_nm).epsilon(1e-15));
    CHECK(b.d2_nm == Approx(2.0 * a.d2_nm).epsilon(1e-15));
    const double k1 = kTwoPi / lam * std::sqrt(2.2 * 2.2 - 1.8 * 1.8);
    CHECK(k1 * a.d1_nm == Approx(std::numbers::pi / 2).epsilon(1e-14));
  }

  SECTION("inverting the published thicknesses") {
    const double ne = 1.75;
    const double n1 = std::sqrt(1.410 * 1.410 + ne * ne);
    const double n2 = std::sqrt(0.799 * 0.799 + ne * ne);
    const auto q = quarter_wave_design(lam, ne, n1, n2);
    CHECK(q.d1_nm == Approx(293.0).epsilon(0.005));
    CHECK(q.d2_nm == Approx(517.0).epsilon(0.005));
  }

  SECTION("domain") {
    CHECK_THROWS_AS(quarter_wave_design(lam, 2.2, 2.2, 2.0), DomainError);
    CHECK_THROWS_AS(quarter_wave_design(lam, 2.1, 2.2, 2.0), DomainError);
  }

  SECTION("fixed point on the preset") {
    const auto dev = preset("brw-paper");
    const auto fp = quarter_wave_fixed_point(dev.stack, lam, dev.pol, Parity::even);
    REQUIRE(!fp.trace.empty());
    CHECK(fp.stack.bilayer[0].thickness_nm == Approx(293.0).epsilon(0.05));
    CHECK(fp.stack.bilayer[1].thickness_nm == Approx(517.0).epsilon(0.05));
    const auto m = find_brw_mode(fp.stack, lam, dev.pol, Parity::even);
    CHECK(std::abs(m.n_eff - fp.n_eff) < 1e-8);
    const auto q = quarter_wave_design(lam, fp.n_eff, *fp.stack.bilayer[0].material, *fp.stack.bilayer[1].material);
    CHECK(q.d1_nm == Approx(fp.stack.bilayer[0].thickness_nm).epsilon(1e-6));
    CHECK(q.d2_nm == Approx(fp.stack.bilayer[1].thickness_nm).epsilon(1e-6));
  }
}

TEST_CASE("core thickness moves the mismatch minimum monotonically", "[phasematch]") {
  const auto dev = preset("brw-paper");
  const auto g = grid(740.0, 860.0, 2.0);
  std::vector<double> where;
  for (double dd : {0.0, 25.0, 50.0}) {
    auto d = dev;
    d.stack = dev.stack.with_core_thickness(dev.stack.core.thickness_nm + dd);
    const auto c = pump_idler_mismatch_curve(d, g, 1550.0);
    REQUIRE(c.zero_crossing_nm);
    where.push_back(*c.zero_crossing_nm);
  }
  INFO(where[0] << " " << where[1] << " " << where[2]);
  const bool up = where[1] > where[0] && where[2] > where[1];
  const bool down = where[1] < where[0] && where[2] < where[1];
  CHECK((up || down));
  CHECK(std::abs(where[2] - 800.0) > 0.5);
}

TEST_CASE("core search without a bracket reports end signs", "[phasematch]") {
  const auto dev = preset("brw-paper");
  CoreSearchOptions opts;
  opts.co_design_cladding = false;
  try {
    core_thickness_search(dev, 800.0, 1550.0, 640.0, 660.0, opts);
    FAIL("expected a search failure");
  } catch (const NumericFailure& e) {
    CHECK(std::string(e.what()).find("640") != std::string::npos);
  }
  CHECK_THROWS_AS(core_thickness_search(dev, 800.0, 1550.0, 700.0, 450.0, opts), DomainError);
}
