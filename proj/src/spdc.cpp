#include "brwspdc/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "brwspdc/errors.hpp"

namespace brwspdc {

double overlap_integral(const FieldProfile& p, const FieldProfile& s, const FieldProfile& i,
                        std::optional<std::pair<double, double>> window, double norm_tol) {
  for (const FieldProfile* f : {&p, &s, &i}) {
    if (f->empty()) throw PreconditionError("overlap_integral: empty profile");
    const double n2 = f->norm_sq();
    if (std::abs(n2 - 1.0) > norm_tol) {
      std::ostringstream os;
      os << "overlap_integral: profile is not normalized (integral of E^2 = " << n2 << ")";
      throw PreconditionError(os.str());
    }
  }

  std::vector<double> xs;
  xs.reserve(p.size() + s.size() + i.size() + 2);
  for (const FieldProfile* f : {&p, &s, &i}) xs.insert(xs.end(), f->x_nm.begin(), f->x_nm.end());
  if (window) {
    if (!(window->second > window->first)) throw DomainError("overlap_integral: empty window");
    xs.push_back(window->first);
    xs.push_back(window->second);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // Each interval uses the right limit at its start and the left limit at
  // its end, so field jumps at interfaces are integrated exactly.
  auto product_right = [&](double x) { return p.value_right(x) * s.value_right(x) * i.value_right(x); };
  auto product_left = [&](double x) { return p.value_left(x) * s.value_left(x) * i.value_left(x); };

  double sum = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double a = xs[k - 1];
    const double b = xs[k];
    if (window && (a < window->first || b > window->second)) continue;
    sum += 0.5 * (b - a) * (product_right(a) + product_left(b));
  }
  return sum;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

SpdcPoint spectral_density(const Device& device, const SpdcConfig& config, double lambda_p_nm,
                           double lambda_s_nm) {
  if (!(config.length_mm > 0.0)) throw DomainError("spectral_density: length must be positive");
  if (!(config.pump_power_mw_per_um > 0.0)) {
    throw DomainError("spectral_density: pump power must be positive");
  }
  const double period = config.period_um ? *config.period_um : device.period_um();

  SpdcPoint pt;
  pt.lambda_p_nm = lambda_p_nm;
  pt.lambda_s_nm = lambda_s_nm;
  pt.lambda_i_nm = idler_wavelength(lambda_p_nm, lambda_s_nm);

  auto opts = device.solver;
  opts.with_profile = true;
  auto solve = [&](Role role, double lambda) {
    try {
      return solve_mode(device.stack, lambda, device.pol, device.family(role), opts);
    } catch (const NotFoundError& e) {
      throw NotFoundError(to_string(role) + ": " + e.what());
    }
  };
  const auto mp = solve(Role::pump, pt.lambda_p_nm);
  const auto ms = solve(Role::signal, pt.lambda_s_nm);
  const auto mi = solve(Role::idler, pt.lambda_i_nm);
  pt.n_p = mp.n_eff;
  pt.n_s = ms.n_eff;
  pt.n_i = mi.n_eff;

  std::optional<std::pair<double, double>> window;
  if (config.core_only_overlap) {
    const double half = 0.5 * device.stack.core.thickness_nm;
    window = std::make_pair(-half, half);
  }
  const double overlap_nm = overlap_integral(mp.profile, ms.profile, mi.profile, window);
  pt.overlap_per_sqrt_um = overlap_nm * std::sqrt(1e3);

  pt.delta_beta = mp.beta_rad_per_um - ms.beta_rad_per_um - mi.beta_rad_per_um -
                  2.0 * std::numbers::pi / period;

  using K = PhysicalConstants;
  const double deff = d_eff(*device.stack.core.material) * 1e-12;  // m/V
  const double l = config.length_mm * 1e-3;                          // m
  const double pump = config.pump_power_mw_per_um * 1e3;             // W/m
  const double overlap_si = overlap_nm * std::sqrt(1e9);             // m^-1/2
  const double ls = pt.lambda_s_nm * 1e-9;
  const double li = pt.lambda_i_nm * 1e-9;
  const double pi3 = std::pow(std::numbers::pi, 3);
  const double per_m = 16.0 * pi3 * K::hbar * deff * deff * l * l * K::c * pump /
                       (K::epsilon0 * pt.n_s * pt.n_p * pt.n_i * std::pow(ls, 4) * li) *
                       overlap_si * overlap_si;
  pt.prefactor = per_m * 1e-9;
  const double arg = pt.delta_beta * 1e6 * l / 2.0;
  const double sc = sinc(arg);
  pt.density = pt.prefactor * sc * sc;
  return pt;
}

void analyze_spectrum(SpdcSpectrum& sp) {
  sp.peak = 0.0;
  sp.peak_at_nm = std::numeric_limits<double>::quiet_NaN();
  sp.fwhm_nm.reset();
  std::size_t k = sp.density.size();
  for (std::size_t j = 0; j < sp.density.size(); ++j) {
    if (!std::isnan(sp.density[j]) && (k == sp.density.size() || sp.density[j] > sp.peak)) {
      sp.peak = sp.density[j];
      k = j;
    }
  }
  if (k == sp.density.size() || !(sp.peak > 0.0)) {
    sp.fwhm_status = "no-peak";
    return;
  }
  sp.peak_at_nm = sp.grid_nm[k];
  const double half = 0.5 * sp.peak;
  const auto& g = sp.grid_nm;
  const auto& y = sp.density;

  // Walk outward until the first sample below half maximum.
  auto crossing = [&](int dir, double& at) -> std::string {
    auto j = static_cast<long>(k);
    const auto n = static_cast<long>(y.size());
    while (true) {
      const long next = j + dir;
      if (next < 0 || next >= n) return "unbounded-in-window";
      const double v = y[static_cast<std::size_t>(next)];
      if (std::isnan(v)) return "gap-in-half-max-region";
      if (v < half) {
        const auto a = static_cast<std::size_t>(j);
        const auto b = static_cast<std::size_t>(next);
        at = g[a] + (half - y[a]) * (g[b] - g[a]) / (y[b] - y[a]);
        return "ok";
      }
      j = next;
    }
  };
  double left = 0.0, right = 0.0;
  const auto ls = crossing(-1, left);
  const auto rs = crossing(+1, right);
  if (ls != "ok") {
    sp.fwhm_status = ls;
  } else if (rs != "ok") {
    sp.fwhm_status = rs;
  } else {
    sp.fwhm_status = "ok";
    sp.fwhm_nm = right - left;
  }
}

namespace {

SpdcSpectrum sweep(const Device& device, const SpdcConfig& config, bool pump_swept, double pivot,
                   const std::vector<double>& grid) {
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw DomainError("sweep grid must be strictly increasing");
  }
  struct Slot {
    double value = std::numeric_limits<double>::quiet_NaN();
    std::string reason;
  };
  const auto slots = map_indices(config.exec, grid.size(), [&](std::size_t k) {
    Slot s;
    try {
      const double lp = pump_swept ? grid[k] : pivot;
      const double ls = pump_swept ? pivot : grid[k];
      s.value = spectral_density(device, config, lp, ls).density;
    } catch (const NotFoundError& e) {
      s.reason = e.what();
    } catch (const NumericFailure& e) {
      s.reason = e.what();
    }
    return s;
  });

  SpdcSpectrum sp;
  sp.swept = pump_swept ? "lambda_p" : "lambda_s";
  sp.pivot_nm = pivot;
  sp.grid_nm = grid;
  for (const auto& s : slots) {
    sp.density.push_back(s.value);
    sp.gap_reasons.push_back(s.reason);
  }
  analyze_spectrum(sp);
  return sp;
}

}  // namespace

SpdcSpectrum pump_sweep(const Device& device, const SpdcConfig& config, double lambda_s_nm,
                        const std::vector<double>& lambda_p_nm) {
  return sweep(device, config, true, lambda_s_nm, lambda_p_nm);
}

SpdcSpectrum signal_sweep(const Device& device, const SpdcConfig& config, double lambda_p_nm,
                          const std::vector<double>& lambda_s_nm) {
  return sweep(device, config, false, lambda_p_nm, lambda_s_nm);
}

double pair_flux(const SpdcSpectrum& spectrum, double center_nm, double width_nm) {
  if (!(width_nm > 0.0)) throw DomainError("pair_flux: window width must be positive");
  const auto& g = spectrum.grid_nm;
  const auto& y = spectrum.density;
  const double a = center_nm - 0.5 * width_nm;
  const double b = center_nm + 0.5 * width_nm;
  if (g.size() < 2 || a < g.front() || b > g.back()) {
    std::ostringstream os;
    os << "pair_flux: window [" << a << ", " << b << "] nm is outside the sweep grid";
    throw RangeError(os.str());
  }
  auto at = [&](double x) {
    auto it = std::upper_bound(g.begin(), g.end(), x);
    std::size_t j = it == g.end() ? g.size() - 1 : static_cast<std::size_t>(it - g.begin());
    if (j == 0) j = 1;
    const double t = (x - g[j - 1]) / (g[j] - g[j - 1]);
    return y[j - 1] + t * (y[j] - y[j - 1]);
  };

  std::vector<double> xs{a};
  for (double x : g) {
    if (x > a && x < b) xs.push_back(x);
  }
  xs.push_back(b);
  double energy = 0.0;  // W
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double ya = at(xs[k - 1]);
    const double yb = at(xs[k]);
    if (std::isnan(ya) || std::isnan(yb)) throw RangeError("pair_flux: gap inside the window");
    energy += 0.5 * (xs[k] - xs[k - 1]) * (ya + yb);
  }
  const double photon = PhysicalConstants::h * PhysicalConstants::c / (center_nm * 1e-9);
  return energy / photon;
}

}  // namespace brwspdc
