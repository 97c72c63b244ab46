#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "brwspdc/errors.hpp"
#include "brwspdc/spdc.hpp"
#include "test_support.hpp"

using namespace brwspdc;
using Catch::Approx;
using testsupport::preset;
using testsupport::slab_oracle;

namespace {

constexpr double kIdlerNm = 1653.3333333333333;

std::vector<double> solver_roots(const std::vector<ModeSolution>& modes, Parity parity) {
  std::vector<double> out;
  for (const auto& m : modes) {
    if (m.parity == parity) out.push_back(m.n_eff);
  }
  return out;
}

void check_profile_invariants(const ModeSolution& m, const LayerStack& stack) {
  const auto& p = m.profile;
  REQUIRE(p.size() > 10);
  CHECK(std::abs(p.norm_sq() - 1.0) < 1e-8);

  double peak = 0.0;
  for (double e : p.field) peak = std::max(peak, std::abs(e));
  const double sign = m.parity == Parity::even ? 1.0 : -1.0;
  const std::size_t n = p.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    REQUIRE(p.x_nm[k] == Approx(-p.x_nm[n - 1 - k]).margin(1e-9));
    worst = std::max(worst, std::abs(p.field[k] - sign * p.field[n - 1 - k]));
  }
  CHECK(worst / peak < 1e-6);

  if (m.parity == Parity::even) {
    CHECK(p.value_right(0.0) > 0.0);
  } else {
    CHECK(p.value_right(5.0) > 0.0);
  }

  // At every interface the tangential pair (w E, V) is continuous.
  const bool tm = m.pol == Polarization::TM;
  double x = 0.5 * stack.core.thickness_nm;
  std::vector<std::pair<double, double>> faces;  // (position, index on the inner side)
  std::vector<double> inner = {stack.core.index(m.lambda_nm)};
  std::vector<double> outer;
  for (int b = 0; b < stack.n_bilayers; ++b) {
    for (const auto& layer : stack.bilayer) {
      outer.push_back(layer.index(m.lambda_nm));
      faces.emplace_back(x, inner.back());
      inner.push_back(outer.back());
      x += layer.thickness_nm;
    }
  }
  double dpeak = 0.0;
  for (double v : p.derivative) dpeak = std::max(dpeak, std::abs(v));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double xf = faces[f].first;
    const auto it = std::lower_bound(p.x_nm.begin(), p.x_nm.end(), xf - 1e-9);
    REQUIRE(it != p.x_nm.end());
    const auto k = static_cast<std::size_t>(it - p.x_nm.begin());
    REQUIRE(k + 1 < n);
    REQUIRE(p.x_nm[k + 1] == Approx(xf).margin(1e-9));
    const double wi = tm ? faces[f].second * faces[f].second : 1.0;
    const double wo = tm ? outer[f] * outer[f] : 1.0;
    CHECK(std::abs(wi * p.field[k] - wo * p.field[k + 1]) < 1e-6 * wi * peak);
    CHECK(std::abs(p.derivative[k] - p.derivative[k + 1]) < 1e-6 * dpeak);
  }
}

}  // namespace

TEST_CASE("symmetric slab matches the analytic dispersion relation", "[modes]") {
  const auto stack = testsupport::slab(2.30, 2.00, 700.0);
  for (bool tm : {false, true}) {
    const auto pol = tm ? Polarization::TM : Polarization::TE;
    const auto modes = find_tir_modes(stack, 800.0, pol);
    for (bool even : {true, false}) {
      const auto want = slab_oracle(2.30, 2.00, 700.0, 800.0, even, tm);
      const auto got = solver_roots(modes, even ? Parity::even : Parity::odd);
      INFO((tm ? "TM" : "TE") << (even ? " even" : " odd"));
      REQUIRE(!want.empty());
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-9);
    }
  }
}

TEST_CASE("TIR modes are sorted and inside the window", "[modes]") {
  const auto dev = preset("conventional-paper");
  const auto modes = find_tir_modes(dev.stack, 800.0, dev.pol);
  REQUIRE(!modes.empty());
  const auto [lo, hi] = tir_window(dev.stack, 800.0);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    CHECK(modes[k].n_eff > lo);
    CHECK(modes[k].n_eff < hi);
    CHECK(modes[k].beta_rad_per_um == Approx(2.0 * std::numbers::pi * modes[k].n_eff / 0.8).epsilon(1e-15));
    if (k) CHECK(modes[k].n_eff < modes[k - 1].n_eff);
    check_profile_invariants(modes[k], dev.stack);
  }
  CHECK(modes.front().parity == Parity::even);
  const double n_clad = testsupport::library().get("AlGaN_x0.20")->index(800.0);
  const double n_core = testsupport::library().get("GaN")->index(800.0);
  CHECK(modes.front().n_eff > n_clad);
  CHECK(modes.front().n_eff < n_core);
}

TEST_CASE("no guidance without contrast", "[modes]") {
  const auto stack = testsupport::slab(2.1, 2.1, 700.0);
  CHECK(find_tir_modes(stack, 800.0, Polarization::TE).empty());
  CHECK(find_tir_modes(stack, 800.0, Polarization::TM).empty());
  CHECK_THROWS_AS(solve_mode(stack, 800.0, Polarization::TE, ModeFamily{}), NotFoundError);
}

TEST_CASE("solve_mode picks the requested order", "[modes]") {
  const auto stack = testsupport::slab(2.30, 2.00, 1500.0);
  const auto all = find_tir_modes(stack, 800.0, Polarization::TE);
  const auto odd = solver_roots(all, Parity::odd);
  REQUIRE(odd.size() >= 2);
  const auto m = solve_mode(stack, 800.0, Polarization::TE, {ModeKind::TIR, Parity::odd, 1});
  CHECK(m.n_eff == Approx(odd[1]).margin(1e-12));
  check_profile_invariants(m, stack);
  CHECK_THROWS_AS(solve_mode(stack, 800.0, Polarization::TE, {ModeKind::TIR, Parity::odd, 50}),
                  NotFoundError);
}

TEST_CASE("Bragg mode of the preset", "[modes]") {
  const auto dev = preset("brw-paper");
  const auto m = find_brw_mode(dev.stack, kIdlerNm, dev.pol, Parity::even);
  const double n1 = dev.stack.bilayer[0].index(kIdlerNm);
  const double n2 = dev.stack.bilayer[1].index(kIdlerNm);
  const double nc = dev.stack.core.index(kIdlerNm);
  REQUIRE(m.n_eff < std::min({nc, n1, n2}));

  const auto bloch = bloch_analyze(dev.stack.bilayer, kIdlerNm, m.n_eff, dev.pol);
  CHECK(bloch.in_stop_band);
  const double mu = std::abs(bloch.bloch_factor);
  CHECK(mu < 1.0);
  CHECK(m.leakage_residual == Approx(std::pow(mu, dev.stack.n_bilayers)).epsilon(1e-12));

  SECTION("quarter-wave self-consistency") {
    const double k1d1 = std::sqrt(transverse_k2(n1, kIdlerNm, m.n_eff)) * dev.stack.bilayer[0].thickness_nm;
    const double k2d2 = std::sqrt(transverse_k2(n2, kIdlerNm, m.n_eff)) * dev.stack.bilayer[1].thickness_nm;
    CHECK(k1d1 == Approx(std::numbers::pi / 2).epsilon(0.02));
    CHECK(k2d2 == Approx(std::numbers::pi / 2).epsilon(0.02));
  }

  SECTION("envelope decays by the Bloch factor per period") {
    const double period = dev.stack.bilayer[0].thickness_nm + dev.stack.bilayer[1].thickness_nm;
    const double x0 = 0.5 * dev.stack.core.thickness_nm;
    for (int k = 0; k + 1 < dev.stack.n_bilayers; ++k) {
      const double a = m.profile.value_right(x0 + k * period);
      const double b = m.profile.value_right(x0 + (k + 1) * period);
      INFO("bilayer " << k);
      CHECK(std::abs(b / a) == Approx(mu).epsilon(0.01));
    }
  }

  SECTION("profile invariants") { check_profile_invariants(m, dev.stack); }

  SECTION("odd parity also solves") {
    try {
      const auto odd = find_brw_mode(dev.stack, kIdlerNm, dev.pol, Parity::odd);
      CHECK(bloch_analyze(dev.stack.bilayer, kIdlerNm, odd.n_eff, dev.pol).in_stop_band);
      check_profile_invariants(odd, dev.stack);
    } catch (const NotFoundError&) {
      SUCCEED("no odd Bragg mode in this stop band");
    }
  }
}

TEST_CASE("Bragg mode outside the stop band is not found", "[modes]") {
  const auto dev = preset("brw-paper");
  for (double lam : {900.0, 2500.0}) {
    INFO(lam << " nm");
    CHECK_THROWS_AS(find_brw_mode(dev.stack, lam, dev.pol, Parity::even), NotFoundError);
  }
  try {
    find_brw_mode(dev.stack, 900.0, dev.pol, Parity::even);
  } catch (const NotFoundError& e) {
    CHECK(std::string(e.what()).find("stop band") != std::string::npos);
  }
}

TEST_CASE("TIR index is insensitive to bilayer count and tail", "[modes]") {
  for (const char* name : {"conventional-paper", "brw-paper"}) {
    const auto dev = preset(name);
    for (double lam : {800.0, 1550.0}) {
      INFO(name << " at " << lam);
      const auto a = solve_mode(dev.stack, lam, dev.pol, dev.pump);
      const auto b = solve_mode(dev.stack.with_bilayer_count(14), lam, dev.pol, dev.pump);
      CHECK(std::abs(a.n_eff - b.n_eff) < 1e-8);

      ModeSolverOptions wide;
      wide.tail_max_nm = 2.0 * wide.tail_max_nm;
      wide.tail_floor = 1e-12;
      const auto c = solve_mode(dev.stack, lam, dev.pol, dev.pump, wide);
      CHECK(std::abs(a.n_eff - c.n_eff) < 1e-9);
      CHECK(c.profile.x_nm.back() >= a.profile.x_nm.back());
      CHECK(std::abs(c.profile.norm_sq() - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("overlap integrals converge with the sampling step", "[modes]") {
  for (const char* name : {"conventional-paper", "brw-paper"}) {
    const auto dev = preset(name);
    auto overlap = [&](double dx) {
      ModeSolverOptions o;
      o.grid_step_nm = dx;
      const auto p = solve_mode(dev.stack, 800.0, dev.pol, dev.pump, o);
      const auto s = solve_mode(dev.stack, 1550.0, dev.pol, dev.signal, o);
      const auto i = solve_mode(dev.stack, kIdlerNm, dev.pol, dev.idler, o);
      return std::pair{overlap_integral(p.profile, s.profile, i.profile),
                       overlap_integral(p.profile, p.profile, p.profile)};
    };
    const auto coarse = overlap(1.0);
    const auto fine = overlap(0.5);
    INFO(name);
    CHECK(testsupport::rel_diff(coarse.first, fine.first) < 1e-6);
    CHECK(testsupport::rel_diff(coarse.second, fine.second) < 1e-6);
  }
}

TEST_CASE("serial and parallel scans agree", "[modes]") {
  const auto dev = preset("brw-paper");
  ModeSolverOptions par;
  par.scan = Execution::parallel;
  const auto a = find_brw_mode(dev.stack, kIdlerNm, dev.pol, Parity::even);
  const auto b = find_brw_mode(dev.stack, kIdlerNm, dev.pol, Parity::even, par);
  CHECK(a.n_eff == b.n_eff);
  const auto ta = find_tir_modes(dev.stack, 800.0, dev.pol);
  const auto tb = find_tir_modes(dev.stack, 800.0, dev.pol, par);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t k = 0; k < ta.size(); ++k) CHECK(ta[k].n_eff == tb[k].n_eff);
}

TEST_CASE("normalize_profile", "[modes]") {
  FieldProfile u;
  const double w = 40.0;
  for (int k = 0; k <= 80; ++k) {
    u.x_nm.push_back(-20.0 + 0.5 * k);
    u.field.push_back(3.7);
    u.derivative.push_back(0.0);
  }
  const auto n = normalize_profile(u);
  for (double e : n.field) CHECK(e == Approx(1.0 / std::sqrt(w)).epsilon(1e-14));

  const auto again = normalize_profile(n);
  for (std::size_t k = 0; k < n.size(); ++k) CHECK(std::abs(again.field[k] - n.field[k]) < 1e-12);

  auto doubled = u;
  for (double& e : doubled.field) e *= -2.0;
  const auto nd = normalize_profile(doubled);
  for (std::size_t k = 0; k < n.size(); ++k) CHECK(nd.field[k] == Approx(n.field[k]).epsilon(1e-14));

  FieldProfile odd = u;
  for (std::size_t k = 0; k < odd.size(); ++k) odd.field[k] = -odd.x_nm[k];
  const auto no = normalize_profile(odd);
  CHECK(no.value_right(5.0) > 0.0);

  auto zero = u;
  for (double& e : zero.field) e = 0.0;
  CHECK_THROWS_AS(normalize_profile(zero), PreconditionError);
}
