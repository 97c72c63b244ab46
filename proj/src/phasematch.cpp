#include "brwspdc/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "brwspdc/errors.hpp"

namespace brwspdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string nm(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x << " nm";
  return os.str();
}

double beta_of(const Device& device, Role role, double lambda_nm) {
  return beta_rad_per_um(mode_index(device, role, lambda_nm), lambda_nm);
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::pump: return "pump";
    case Role::signal: return "signal";
    case Role::idler: return "idler";
  }
  return "?";
}

const ModeFamily& Device::family(Role role) const {
  switch (role) {
    case Role::pump: return pump;
    case Role::signal: return signal;
    case Role::idler: return idler;
  }
  return pump;
}

double Device::period_um() const {
  if (!stack.qpm_period_um) {
    throw PreconditionError("stack '" + stack.name + "' has no QPM period");
  }
  return *stack.qpm_period_um;
}

double idler_wavelength(double lambda_p_nm, double lambda_s_nm) {
  if (!(lambda_p_nm > 0.0) || !(lambda_s_nm > lambda_p_nm)) {
    throw DomainError("idler_wavelength: need lambda_s > lambda_p > 0 (got lambda_p = " +
                      nm(lambda_p_nm) + ", lambda_s = " + nm(lambda_s_nm) + ")");
  }
  return 1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_nm);
}

double mode_index(const Device& device, Role role, double lambda_nm) {
  auto opts = device.solver;
  opts.with_profile = false;
  try {
    return solve_mode(device.stack, lambda_nm, device.pol, device.family(role), opts).n_eff;
  } catch (const NotFoundError& e) {
    throw NotFoundError(to_string(role) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

DispersionCurve build_dispersion(const LayerStack& stack, Polarization pol,
                                 const ModeFamily& family, const std::vector<double>& lambda_nm,
                                 const ModeSolverOptions& solver, const DispersionOptions& opts) {
  DispersionCurve curve;
  curve.family = family;
  curve.pol = pol;
  curve.lambda_nm = lambda_nm;
  if (lambda_nm.empty()) return curve;

  auto sopts = solver;
  sopts.with_profile = false;
  struct Point {
    double n = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  auto solve = [&](std::size_t k) {
    Point p;
    try {
      p.n = solve_mode(stack, lambda_nm[k], pol, family, sopts).n_eff;
    } catch (const NotFoundError& e) {
      p.error = e.what();
    }
    return p;
  };
  std::vector<Point> points(lambda_nm.size());
  points[0] = solve(0);
  auto rest = map_indices(opts.exec, lambda_nm.size() - 1, [&](std::size_t k) { return solve(k + 1); });
  std::move(rest.begin(), rest.end(), points.begin() + 1);

  for (std::size_t k = 0; k < points.size(); ++k) {
    const bool lost = !points[k].error.empty() ||
                      (k > 0 && std::abs(points[k].n - points[k - 1].n) > opts.max_jump);
    if (lost) {
      std::string msg = "lost mode family " + to_string(family) + " at " + nm(lambda_nm[k]);
      if (k > 0) msg += " (last good point " + nm(lambda_nm[k - 1]) + ")";
      if (!points[k].error.empty()) msg += ": " + points[k].error;
      throw NotFoundError(msg);
    }
    curve.n_eff.push_back(points[k].n);
    curve.beta_rad_per_um.push_back(beta_rad_per_um(points[k].n, lambda_nm[k]));
  }
  return curve;
}

// ---------------------------------------------------------------------------

QpmSolution qpm_period(const Device& device, double lambda_p_nm, double lambda_s_nm) {
  QpmSolution q;
  q.lambda_p_nm = lambda_p_nm;
  q.lambda_s_nm = lambda_s_nm;
  q.lambda_i_nm = idler_wavelength(lambda_p_nm, lambda_s_nm);
  q.n_p = mode_index(device, Role::pump, q.lambda_p_nm);
  q.n_s = mode_index(device, Role::signal, q.lambda_s_nm);
  q.n_i = mode_index(device, Role::idler, q.lambda_i_nm);
  const double k = beta_rad_per_um(q.n_p, q.lambda_p_nm) - beta_rad_per_um(q.n_s, q.lambda_s_nm) -
                   beta_rad_per_um(q.n_i, q.lambda_i_nm);
  if (!(k > 0.0)) {
    std::ostringstream os;
    os << "no first-order QPM period: beta_p - beta_s - beta_i = " << k << " rad/um";
    throw DomainError(os.str());
  }
  q.period_um = kTwoPi / k;
  q.delta_beta = k - kTwoPi / q.period_um;
  return q;
}

void resolve_qpm_period(Device& device) {
  if (!device.qpm_design_point) return;
  const auto [lp, ls] = *device.qpm_design_point;
  device.stack.qpm_period_um = qpm_period(device, lp, ls).period_um;
}

double phase_mismatch(const Device& device, double lambda_p_nm, double lambda_s_nm,
                      double period_um) {
  const double li = idler_wavelength(lambda_p_nm, lambda_s_nm);
  return beta_of(device, Role::pump, lambda_p_nm) - beta_of(device, Role::signal, lambda_s_nm) -
         beta_of(device, Role::idler, li) - kTwoPi / period_um;
}

// ---------------------------------------------------------------------------

namespace {

double pump_idler_difference(const Device& device, double lambda_p_nm, double lambda_s_nm) {
  const double li = idler_wavelength(lambda_p_nm, lambda_s_nm);
  return beta_of(device, Role::pump, lambda_p_nm) - beta_of(device, Role::idler, li);
}

std::optional<double> first_zero(const std::vector<double>& x, const std::vector<double>& y) {
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (y[k - 1] == 0.0) return x[k - 1];
    if ((y[k - 1] > 0.0) != (y[k] > 0.0)) {
      return x[k - 1] - y[k - 1] * (x[k] - x[k - 1]) / (y[k] - y[k - 1]);
    }
  }
  if (!y.empty() && y.back() == 0.0) return x.back();
  return std::nullopt;
}

}  // namespace

MismatchCurve pump_idler_mismatch_curve(const Device& device, const std::vector<double>& lambda_p_nm,
                                        double lambda_s_nm, Execution exec) {
  if (lambda_p_nm.size() < 2) {
    throw PreconditionError("pump_idler_mismatch_curve: need at least two grid points");
  }
  const double h = lambda_p_nm[1] - lambda_p_nm[0];
  for (std::size_t k = 1; k < lambda_p_nm.size(); ++k) {
    const double step = lambda_p_nm[k] - lambda_p_nm[k - 1];
    if (!(step > 0.0) || std::abs(step - h) > 1e-6 * h) {
      throw PreconditionError("pump_idler_mismatch_curve: grid must be uniform and increasing");
    }
  }

  const std::size_t n = lambda_p_nm.size();
  std::vector<double> ext(n + 2);
  ext[0] = lambda_p_nm.front() - h;
  std::copy(lambda_p_nm.begin(), lambda_p_nm.end(), ext.begin() + 1);
  ext[n + 1] = lambda_p_nm.back() + h;

  const auto values = map_indices(exec, ext.size(), [&](std::size_t k) {
    try {
      return pump_idler_difference(device, ext[k], lambda_s_nm);
    } catch (const Error& e) {
      throw NotFoundError("at lambda_p = " + nm(ext[k]) + ": " + e.what());
    }
  });

  MismatchCurve c;
  c.lambda_s_nm = lambda_s_nm;
  c.lambda_p_nm = lambda_p_nm;
  c.beta_diff.assign(values.begin() + 1, values.end() - 1);
  c.derivative.resize(n);
  for (std::size_t k = 0; k < n; ++k) c.derivative[k] = (values[k + 2] - values[k]) / (2.0 * h);
  c.zero_crossing_nm = first_zero(c.lambda_p_nm, c.derivative);
  return c;
}

double mismatch_slope(const Device& device, double lambda_p_nm, double lambda_s_nm,
                      double step_nm) {
  const double up = pump_idler_difference(device, lambda_p_nm + step_nm, lambda_s_nm);
  const double down = pump_idler_difference(device, lambda_p_nm - step_nm, lambda_s_nm);
  return (up - down) / (2.0 * step_nm);
}

// ---------------------------------------------------------------------------

TuningPoint phase_matched_signal(const Device& device, double period_um, double lambda_p_nm,
                                 const TuningOptions& opts) {
  if (!(period_um > 0.0)) throw DomainError("tuning: QPM period must be positive");
  const double beta_p = beta_of(device, Role::pump, lambda_p_nm);
  const double grating = kTwoPi / period_um;
  auto mismatch = [&](double ls) {
    const double li = idler_wavelength(lambda_p_nm, ls);
    return beta_p - beta_of(device, Role::signal, ls) - beta_of(device, Role::idler, li) - grating;
  };
  auto safe = [&](double ls) {
    try {
      return mismatch(ls);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  double lo = opts.signal_lo_nm;
  double hi = opts.signal_hi_nm;
  while (true) {
    std::vector<double> xs;
    for (double x = lo; x < hi + 1e-9; x += opts.scan_step_nm) xs.push_back(x);
    if (xs.back() < hi) xs.push_back(hi);
    std::vector<double> ys(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = safe(xs[k]);

    std::optional<double> best;
    for (std::size_t k = 1; k < xs.size(); ++k) {
      if (std::isnan(ys[k - 1]) || std::isnan(ys[k])) continue;
      if ((ys[k - 1] > 0.0) == (ys[k] > 0.0) && ys[k] != 0.0) continue;
      double a = xs[k - 1], b = xs[k], fa = ys[k - 1];
      double root = std::abs(fa) < opts.tolerance ? a : std::numeric_limits<double>::quiet_NaN();
      for (int it = 0; it < 200 && std::isnan(root); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = mismatch(m);
        if (std::abs(fm) < opts.tolerance) {
          root = m;
        } else if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
        if (b - a < 1e-11 && std::isnan(root)) {
          throw NumericFailure("tuning: |delta beta| did not reach tolerance at lambda_p = " +
                                   nm(lambda_p_nm),
                               a, b);
        }
      }
      if (std::isnan(root)) continue;
      if (!best || std::abs(root - opts.reference_nm) < std::abs(*best - opts.reference_nm)) {
        best = root;
      }
    }
    if (best) {
      TuningPoint p;
      p.lambda_p_nm = lambda_p_nm;
      p.lambda_s_nm = *best;
      p.lambda_i_nm = idler_wavelength(lambda_p_nm, *best);
      p.delta_beta = mismatch(*best);
      return p;
    }
    if (lo <= opts.widest_lo_nm && hi >= opts.widest_hi_nm) break;
    lo = std::max(opts.widest_lo_nm, lo - opts.widen_step_nm);
    hi = std::min(opts.widest_hi_nm, hi + opts.widen_step_nm);
  }
  throw NotFoundError("no phase-matched signal in [" + nm(opts.widest_lo_nm) + ", " +
                      nm(opts.widest_hi_nm) + "] at lambda_p = " + nm(lambda_p_nm));
}

TuningCurve tuning_curve(const Device& device, double period_um,
                         const std::vector<double>& lambda_p_nm, const TuningOptions& opts) {
  struct Slot {
    bool ok = false;
    TuningPoint point;
    std::string reason;
  };
  const auto slots = map_indices(opts.exec, lambda_p_nm.size(), [&](std::size_t k) {
    Slot s;
    try {
      s.point = phase_matched_signal(device, period_um, lambda_p_nm[k], opts);
      s.ok = true;
    } catch (const NotFoundError& e) {
      s.reason = e.what();
    }
    return s;
  });
  TuningCurve curve;
  curve.period_um = period_um;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k].ok) {
      curve.points.push_back(slots[k].point);
    } else {
      curve.gaps_nm.push_back(lambda_p_nm[k]);
      curve.gap_reasons.push_back(slots[k].reason);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------

QuarterWave quarter_wave_design(double lambda_i_nm, double n_eff, double n1, double n2) {
  if (!(n_eff < n1) || !(n_eff < n2)) {
    std::ostringstream os;
    os << "quarter_wave_design: n_eff = " << n_eff << " must lie below both cladding indices ("
       << n1 << ", " << n2 << ")";
    throw DomainError(os.str());
  }
  return {lambda_i_nm / (4.0 * std::sqrt(n1 * n1 - n_eff * n_eff)),
          lambda_i_nm / (4.0 * std::sqrt(n2 * n2 - n_eff * n_eff))};
}

QuarterWave quarter_wave_design(double lambda_i_nm, double n_eff, const MaterialModel& m1,
                                const MaterialModel& m2) {
  return quarter_wave_design(lambda_i_nm, n_eff, m1.index(lambda_i_nm), m2.index(lambda_i_nm));
}

QuarterWaveFixedPoint quarter_wave_fixed_point(const LayerStack& stack, double lambda_i_nm,
                                               Polarization pol, Parity parity,
                                               const ModeSolverOptions& solver, double tol,
                                               int max_iter) {
  auto opts = solver;
  opts.with_profile = false;
  const auto& m1 = *stack.bilayer[0].material;
  const auto& m2 = *stack.bilayer[1].material;

  QuarterWaveFixedPoint out;
  out.stack = stack;
  // One pass of the design loop: thicknesses from n, then the Bragg index
  // of the resulting stack.
  auto step = [&](double n) {
    const auto qw = quarter_wave_design(lambda_i_nm, n, m1, m2);
    auto s = out.stack.with_bilayer_thicknesses(qw.d1_nm, qw.d2_nm);
    const double g = find_brw_mode(s, lambda_i_nm, pol, parity, opts).n_eff;
    out.trace.push_back({g, qw.d1_nm, qw.d2_nm});
    return std::make_pair(g, s);
  };

  double n_prev = find_brw_mode(out.stack, lambda_i_nm, pol, parity, opts).n_eff;
  out.trace.push_back({n_prev, stack.bilayer[0].thickness_nm, stack.bilayer[1].thickness_nm});
  auto [g_prev, s_prev] = step(n_prev);
  double r_prev = g_prev - n_prev;
  double n = g_prev;
  bool accelerated = false;
  for (int it = 1; it < max_iter; ++it) {
    if (std::abs(r_prev) < tol) {
      out.stack = s_prev;
      out.n_eff = g_prev;
      return out;
    }
    double g = 0.0;
    LayerStack s;
    try {
      std::tie(g, s) = step(n);
    } catch (const Error&) {
      // An extrapolated guess can leave the stop band; retreat to substitution.
      if (!accelerated) throw;
      n = g_prev;
      accelerated = false;
      continue;
    }
    const double r = g - n;
    if (std::abs(r) < tol) {
      out.stack = s;
      out.n_eff = g;
      return out;
    }
    // Secant update on g(n) - n, limited in size relative to a substitution step.
    double next = g;
    accelerated = false;
    if (r != r_prev) {
      const double secant = n - r * (n - n_prev) / (r - r_prev);
      if (std::isfinite(secant) && std::abs(secant - n) <= 50.0 * std::abs(r)) {
        next = secant;
        accelerated = true;
      }
    }
    n_prev = n;
    r_prev = r;
    g_prev = g;
    s_prev = s;
    n = next;
  }
  throw NumericFailure("quarter-wave fixed point did not converge in " + std::to_string(max_iter) +
                           " iterations",
                       n_prev, n);
}

// ---------------------------------------------------------------------------

CoreSearchResult core_thickness_search(const Device& device, double lambda_p_nm,
                                       double lambda_s_nm, double d_c_lo_nm, double d_c_hi_nm,
                                       const CoreSearchOptions& opts) {
  if (!(d_c_lo_nm > 0.0) || !(d_c_hi_nm > d_c_lo_nm)) {
    throw DomainError("core_thickness_search: need 0 < lo < hi");
  }
  const double lambda_i = idler_wavelength(lambda_p_nm, lambda_s_nm);
  CoreSearchResult result;

  auto evaluate = [&](double d_c, Device& candidate) {
    candidate = device;
    candidate.stack = device.stack.with_core_thickness(d_c);
    if (opts.co_design_cladding) {
      candidate.stack = quarter_wave_fixed_point(candidate.stack, lambda_i, device.pol,
                                                 device.idler.parity, device.solver)
                            .stack;
    }
    CoreSearchSample s;
    s.d_c_nm = d_c;
    s.d1_nm = candidate.stack.bilayer[0].thickness_nm;
    s.d2_nm = candidate.stack.bilayer[1].thickness_nm;
    s.slope = mismatch_slope(candidate, lambda_p_nm, lambda_s_nm, opts.slope_step_nm);
    result.trace.push_back(s);
    return s.slope;
  };

  Device scratch;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // Core thicknesses without a Bragg solution (or quarter-wave fixed point)
  // are infeasible and skipped by the coarse scan.
  auto feasible = [&](double d_c) {
    try {
      return evaluate(d_c, scratch);
    } catch (const NotFoundError&) {
      return nan;
    } catch (const NumericFailure&) {
      return nan;
    } catch (const DomainError&) {
      return nan;
    }
  };

  std::vector<double> xs;
  for (double x = d_c_lo_nm; x < d_c_hi_nm - 1e-9; x += opts.coarse_step_nm) xs.push_back(x);
  xs.push_back(d_c_hi_nm);
  std::vector<double> slopes(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) slopes[k] = feasible(xs[k]);

  double a = 0.0, b = 0.0, fa = 0.0;
  bool bracketed = false;
  for (std::size_t k = 1; k < xs.size() && !bracketed; ++k) {
    const double f0 = slopes[k - 1];
    const double f1 = slopes[k];
    if (std::isnan(f0) || std::isnan(f1)) continue;
    if ((f1 > 0.0) != (f0 > 0.0) || f1 == 0.0) {
      a = xs[k - 1];
      b = xs[k];
      fa = f0;
      bracketed = true;
    }
  }
  if (!bracketed) {
    auto sign = [](double v) { return std::isnan(v) ? std::string("infeasible") : v > 0 ? "+" : "-"; };
    std::ostringstream os;
    os << "core_thickness_search: d(beta_p - beta_i)/d(lambda_p) does not change sign; slope "
       << sign(slopes.front()) << " at " << d_c_lo_nm << " nm and " << sign(slopes.back()) << " at "
       << d_c_hi_nm << " nm";
    throw NumericFailure(os.str(), d_c_lo_nm, d_c_hi_nm);
  }
  while (b - a > opts.tol_nm) {
    const double m = 0.5 * (a + b);
    const double fm = evaluate(m, scratch);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  result.d_c_nm = 0.5 * (a + b);
  evaluate(result.d_c_nm, result.device);
  auto sopts = device.solver;
  sopts.with_profile = false;
  result.idler_n_eff = solve_mode(result.device.stack, lambda_i, device.pol, device.idler, sopts).n_eff;
  return result;
}

}  // namespace brwspdc
