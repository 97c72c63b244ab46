#include "brwspdc/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "brwspdc/errors.hpp"

namespace brwspdc {

std::string to_string(ModeKind kind) { return kind == ModeKind::TIR ? "TIR" : "BRW"; }
std::string to_string(Parity parity) { return parity == Parity::even ? "even" : "odd"; }

std::string to_string(const ModeFamily& family) {
  std::string s = to_string(family.kind) + "/" + to_string(family.parity);
  if (family.kind == ModeKind::TIR) s += "/" + std::to_string(family.order);
  return s;
}

double beta_rad_per_um(double n_eff, double lambda_nm) {
  return 2.0 * std::numbers::pi * n_eff / (lambda_nm * 1e-3);
}

// ---------------------------------------------------------------------------
// FieldProfile

double FieldProfile::norm_sq() const {
  double sum = 0.0;
  for (std::size_t k = 1; k < x_nm.size(); ++k) {
    const double h = x_nm[k] - x_nm[k - 1];
    sum += 0.5 * h * (field[k] * field[k] + field[k - 1] * field[k - 1]);
  }
  return sum;
}

namespace {

double interpolate(const FieldProfile& p, double x, bool right) {
  if (p.empty() || x < p.x_nm.front() || x > p.x_nm.back()) return 0.0;
  const auto& xs = p.x_nm;
  // First node with xs[i] > x (right limit) or >= x (left limit).
  auto it = right ? std::upper_bound(xs.begin(), xs.end(), x)
                  : std::lower_bound(xs.begin(), xs.end(), x);
  if (right) {
    if (it == xs.begin()) return p.field.front();
    auto i = static_cast<std::size_t>(it - xs.begin()) - 1;  // last node <= x
    if (xs[i] == x || i + 1 == xs.size()) return p.field[i];
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return p.field[i] + t * (p.field[i + 1] - p.field[i]);
  }
  if (it == xs.end()) return p.field.back();
  auto j = static_cast<std::size_t>(it - xs.begin());  // first node >= x
  if (xs[j] == x || j == 0) return p.field[j];
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return p.field[j - 1] + t * (p.field[j] - p.field[j - 1]);
}

}  // namespace

double FieldProfile::value_left(double x) const { return interpolate(*this, x, false); }
double FieldProfile::value_right(double x) const { return interpolate(*this, x, true); }

FieldProfile normalize_profile(const FieldProfile& profile) {
  const double n2 = profile.norm_sq();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw PreconditionError("normalize_profile: field is identically zero or not finite");
  }
  double scale = 1.0 / std::sqrt(n2);

  double peak = 0.0;
  for (double e : profile.field) peak = std::max(peak, std::abs(e));
  const double center = profile.x_nm.front() <= 0.0 && profile.x_nm.back() >= 0.0
                            ? 0.0
                            : 0.5 * (profile.x_nm.front() + profile.x_nm.back());
  const double at_center = 0.5 * (profile.value_left(center) + profile.value_right(center));
  if (std::abs(at_center) > 1e-6 * peak) {
    if (at_center < 0.0) scale = -scale;
  } else {
    // Odd about the center: orient by the slope, read off the first node to the right.
    auto it = std::upper_bound(profile.x_nm.begin(), profile.x_nm.end(), center);
    if (it != profile.x_nm.end()) {
      const auto k = static_cast<std::size_t>(it - profile.x_nm.begin());
      if (profile.field[k] - at_center < 0.0) scale = -scale;
    }
  }

  FieldProfile out = profile;
  for (double& e : out.field) e *= scale;
  for (double& v : out.derivative) v *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Solver internals

namespace {

struct Slice {
  double index;
  double thickness;
};

struct Resolved {
  std::vector<Slice> half;  // core center outward
  double n_core;
  double n_ext;
  double n1;
  double n2;
};

Resolved resolve(const LayerStack& stack, double lambda_nm) {
  Resolved r;
  r.n_core = stack.core.index(lambda_nm);
  r.n1 = stack.bilayer[0].index(lambda_nm);
  r.n2 = stack.bilayer[1].index(lambda_nm);
  r.n_ext = stack.exterior->index(lambda_nm);
  r.half.push_back({r.n_core, 0.5 * stack.core.thickness_nm});
  for (int k = 0; k < stack.n_bilayers; ++k) {
    r.half.push_back({r.n1, stack.bilayer[0].thickness_nm});
    r.half.push_back({r.n2, stack.bilayer[1].thickness_nm});
  }
  return r;
}

double weight(double index, Polarization pol) { return pol == Polarization::TM ? index * index : 1.0; }

// V carries a 1/length unit; this puts it on the same footing as U.
double v_scale(const Resolved& r, double lambda_nm, Polarization pol) {
  return weight(r.n_core, pol) * lambda_nm / (2.0 * std::numbers::pi);
}

double tir_dispersion_resolved(const Resolved& r, double lambda_nm, double n_eff,
                               Polarization pol, Parity parity) {
  const double k0 = 2.0 * std::numbers::pi / lambda_nm;
  const double gamma = k0 * std::sqrt(std::max(n_eff * n_eff - r.n_ext * r.n_ext, 0.0));
  const double vs = v_scale(r, lambda_nm, pol);
  double u = 1.0;
  double v = -gamma / weight(r.n_ext, pol);
  for (auto it = r.half.rbegin(); it != r.half.rend(); ++it) {
    const auto m = layer_matrix_real(it->index, -it->thickness, lambda_nm, n_eff, pol);
    const double un = m.m11 * u + m.m12 * v;
    const double vn = m.m21 * u + m.m22 * v;
    const double norm = std::hypot(un, vn * vs);
    u = un / norm;
    v = vn / norm;
  }
  const double norm = std::hypot(u, v * vs);
  return parity == Parity::even ? v * vs / norm : u / norm;
}

template <class F>
double bisect(F&& f, double lo, double hi, double f_lo, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > tol) throw NumericFailure("root refinement did not converge", lo, hi);
  return 0.5 * (lo + hi);
}

// Descending n_eff grid strictly inside (lo, hi).
std::vector<double> scan_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const double top = hi - 1e-9;
  const double bottom = lo + 1e-9;
  if (top <= bottom) return g;
  const auto n = static_cast<std::size_t>(std::floor((top - bottom) / step)) + 1;
  g.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) g.push_back(top - static_cast<double>(k) * step);
  if (g.back() > bottom) g.push_back(bottom);
  return g;
}

// Roots in descending order; stops after max_roots when that is nonzero.
std::vector<double> tir_roots(const Resolved& r, double lambda_nm, Polarization pol,
                              Parity parity, double lo, double hi, const ModeSolverOptions& opts,
                              std::size_t max_roots = 0) {
  const auto grid = scan_grid(lo, hi, opts.scan_step);
  if (grid.size() < 2) return {};
  auto f = [&](double n) { return tir_dispersion_resolved(r, lambda_nm, n, pol, parity); };

  std::vector<double> roots;
  if (max_roots > 0 && opts.scan == Execution::serial) {
    double prev = f(grid[0]);
    for (std::size_t k = 1; k < grid.size() && roots.size() < max_roots; ++k) {
      const double cur = f(grid[k]);
      if (cur == 0.0) {
        roots.push_back(grid[k]);
      } else if ((cur > 0.0) != (prev > 0.0) && prev != 0.0) {
        roots.push_back(bisect(f, grid[k], grid[k - 1], cur, opts.root_tol));
      }
      prev = cur;
    }
    return roots;
  }

  const auto values = map_indices(opts.scan, grid.size(), [&](std::size_t k) { return f(grid[k]); });
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (max_roots > 0 && roots.size() >= max_roots) break;
    if (values[k] == 0.0) {
      roots.push_back(grid[k]);
    } else if ((values[k] > 0.0) != (values[k - 1] > 0.0) && values[k - 1] != 0.0) {
      roots.push_back(bisect(f, grid[k], grid[k - 1], values[k], opts.root_tol));
    }
  }
  return roots;
}

struct BrwPoint {
  bool in_gap = false;
  double mu = 0.0;
  double vu = 0.0;  // decaying Bloch eigenvector, scaled basis, unit norm
  double vv = 0.0;
  double cu = 0.0;  // core-edge state, scaled basis, unit norm
  double cv = 0.0;
};

BrwPoint brw_point(const Resolved& r, const LayerStack& stack, double lambda_nm, double n_eff,
                   Polarization pol, Parity parity) {
  BrwPoint p;
  const auto m1 = layer_matrix_real(r.n1, stack.bilayer[0].thickness_nm, lambda_nm, n_eff, pol);
  const auto m2 = layer_matrix_real(r.n2, stack.bilayer[1].thickness_nm, lambda_nm, n_eff, pol);
  const double t11 = m2.m11 * m1.m11 + m2.m12 * m1.m21;
  const double t12 = m2.m11 * m1.m12 + m2.m12 * m1.m22;
  const double t21 = m2.m21 * m1.m11 + m2.m22 * m1.m21;
  const double t22 = m2.m21 * m1.m12 + m2.m22 * m1.m22;
  const double h = 0.5 * (t11 + t22);
  if (std::abs(h) <= 1.0) return p;
  p.in_gap = true;
  const double root = std::sqrt(h * h - 1.0);
  p.mu = h > 0.0 ? h - root : h + root;

  const double vs = v_scale(r, lambda_nm, pol);
  // Two parallel eigenvector formulas; take the better conditioned one.
  double au = t12, av = p.mu - t11;
  double bu = p.mu - t22, bv = t21;
  const double na = std::hypot(au, av * vs);
  const double nb = std::hypot(bu, bv * vs);
  if (na >= nb) {
    p.vu = au / na;
    p.vv = av * vs / na;
  } else {
    p.vu = bu / nb;
    p.vv = bv * vs / nb;
  }

  const auto mc = layer_matrix_real(r.n_core, 0.5 * stack.core.thickness_nm, lambda_nm, n_eff, pol);
  double cu = parity == Parity::even ? mc.m11 : mc.m12;
  double cv = (parity == Parity::even ? mc.m21 : mc.m22) * vs;
  const double nc = std::hypot(cu, cv);
  p.cu = cu / nc;
  p.cv = cv / nc;
  return p;
}

// Orients p's eigenvector along (ref_u, ref_v) and returns the mismatch
// between the core-edge state and the decaying Bloch wave.
double brw_mismatch(BrwPoint& p, double ref_u, double ref_v) {
  if (p.vu * ref_u + p.vv * ref_v < 0.0) {
    p.vu = -p.vu;
    p.vv = -p.vv;
  }
  return p.cu * p.vv - p.cv * p.vu;
}

struct BrwRoot {
  double n_eff;
  double mu;
};

struct BrwScan {
  std::vector<BrwRoot> roots;
  double gap_hi = std::numeric_limits<double>::quiet_NaN();
  double gap_lo = std::numeric_limits<double>::quiet_NaN();
};

BrwScan brw_scan(const Resolved& r, const LayerStack& stack, double lambda_nm, Polarization pol,
                 Parity parity, double lo, double hi, bool first_gap_only,
                 const ModeSolverOptions& opts) {
  BrwScan out;
  const auto grid = scan_grid(lo, hi, opts.scan_step);
  auto points = map_indices(opts.scan, grid.size(), [&](std::size_t k) {
    return brw_point(r, stack, lambda_nm, grid[k], pol, parity);
  });

  bool seen_gap = false;
  bool have_prev = false;
  double prev_d = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto& p = points[k];
    if (!p.in_gap) {
      have_prev = false;
      if (seen_gap && first_gap_only) break;
      continue;
    }
    if (!seen_gap) out.gap_hi = grid[k];
    seen_gap = true;
    out.gap_lo = grid[k];
    double d = have_prev ? brw_mismatch(p, points[k - 1].vu, points[k - 1].vv)
                         : brw_mismatch(p, p.vu, p.vv);
    if (have_prev && (d > 0.0) != (prev_d > 0.0)) {
      // Refine in [grid[k], grid[k-1]], carrying the orientation along.
      double a = grid[k], b = grid[k - 1];
      double fa = d;
      double ref_u = p.vu, ref_v = p.vv;
      for (int it = 0; it < 200 && b - a > opts.root_tol; ++it) {
        const double m = 0.5 * (a + b);
        auto pm = brw_point(r, stack, lambda_nm, m, pol, parity);
        if (!pm.in_gap) break;
        const double fm = brw_mismatch(pm, ref_u, ref_v);
        if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
          ref_u = pm.vu;
          ref_v = pm.vv;
        } else {
          b = m;
        }
      }
      const double root = 0.5 * (a + b);
      auto pr = brw_point(r, stack, lambda_nm, root, pol, parity);
      if (pr.in_gap && b - a <= opts.root_tol) {
        const double residual = std::abs(brw_mismatch(pr, ref_u, ref_v));
        // Sign flips of the eigenvector orientation are not roots.
        if (residual < 1e-6) out.roots.push_back({root, pr.mu});
      }
    }
    prev_d = d;
    have_prev = true;
  }
  return out;
}

// Node positions for one slice starting at x0: spacing at most dx, both ends included.
std::vector<double> slice_nodes(double x0, double d, double dx) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d / dx - 1e-9)));
  std::vector<double> xs(n + 1);
  for (std::size_t k = 0; k <= n; ++k) xs[k] = x0 + d * static_cast<double>(k) / static_cast<double>(n);
  xs[n] = x0 + d;
  return xs;
}

struct HalfField {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> w;  // TM weight of the medium at each node
};

FieldProfile mirror(const HalfField& h, Parity parity, double dx) {
  FieldProfile p;
  p.dx_nm = dx;
  const std::size_t n = h.x.size();
  const double su = parity == Parity::even ? 1.0 : -1.0;
  p.x_nm.reserve(2 * n);
  p.field.reserve(2 * n);
  p.derivative.reserve(2 * n);
  // Negative side, skipping the center node.
  for (std::size_t k = n; k-- > 1;) {
    p.x_nm.push_back(-h.x[k]);
    p.field.push_back(su * h.u[k] / h.w[k]);
    p.derivative.push_back(-su * h.v[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    p.x_nm.push_back(h.x[k]);
    p.field.push_back(h.u[k] / h.w[k]);
    p.derivative.push_back(h.v[k]);
  }
  return p;
}

FieldProfile tir_profile(const Resolved& r, double lambda_nm, double n_eff, Polarization pol,
                         Parity parity, const ModeSolverOptions& opts) {
  const double dx = opts.grid_step_nm;
  const double k0 = 2.0 * std::numbers::pi / lambda_nm;
  const double gamma = k0 * std::sqrt(std::max(n_eff * n_eff - r.n_ext * r.n_ext, 0.0));
  const double w_ext = weight(r.n_ext, pol);

  double x_end = 0.0;
  for (const auto& s : r.half) x_end += s.thickness;

  // Inward from the exterior boundary; the bound solution grows in that direction.
  struct Block {
    std::vector<double> x, u, v;
    double w;
  };
  std::vector<Block> blocks(r.half.size());
  double u = 1.0;
  double v = -gamma / w_ext;
  double x_out = x_end;
  for (std::size_t j = r.half.size(); j-- > 0;) {
    const auto& s = r.half[j];
    const double x_in = x_out - s.thickness;
    auto& b = blocks[j];
    b.w = weight(s.index, pol);
    b.x = slice_nodes(x_in, s.thickness, dx);
    b.u.resize(b.x.size());
    b.v.resize(b.x.size());
    for (std::size_t k = 0; k < b.x.size(); ++k) {
      const auto m = layer_matrix_real(s.index, b.x[k] - x_out, lambda_nm, n_eff, pol);
      b.u[k] = m.m11 * u + m.m12 * v;
      b.v[k] = m.m21 * u + m.m22 * v;
    }
    u = b.u.front();
    v = b.v.front();
    const double norm = std::hypot(u, v);
    if (norm > 1e100) {
      for (std::size_t i = j; i < blocks.size(); ++i) {
        for (double& q : blocks[i].u) q /= norm;
        for (double& q : blocks[i].v) q /= norm;
      }
      u /= norm;
      v /= norm;
    }
    x_out = x_in;
  }

  HalfField h;
  for (const auto& b : blocks) {
    h.x.insert(h.x.end(), b.x.begin(), b.x.end());
    h.u.insert(h.u.end(), b.u.begin(), b.u.end());
    h.v.insert(h.v.end(), b.v.begin(), b.v.end());
    h.w.insert(h.w.end(), b.x.size(), b.w);
  }

  // Exterior tail.
  double peak = 0.0;
  for (std::size_t k = 0; k < h.u.size(); ++k) peak = std::max(peak, std::abs(h.u[k] / h.w[k]));
  const double e_edge = std::abs(blocks.back().u.back()) / w_ext;
  double tail = opts.tail_max_nm;
  if (gamma > 0.0 && e_edge > 0.0) {
    tail = std::min(tail, std::log(e_edge / (opts.tail_floor * peak)) / gamma);
  }
  if (tail > 0.0) {
    const double u_b = blocks.back().u.back();
    for (double x : slice_nodes(x_end, tail, dx)) {
      const double ue = u_b * std::exp(-gamma * (x - x_end));
      h.x.push_back(x);
      h.u.push_back(ue);
      h.v.push_back(-gamma / w_ext * ue);
      h.w.push_back(w_ext);
    }
  }
  return normalize_profile(mirror(h, parity, dx));
}

FieldProfile brw_profile(const Resolved& r, double lambda_nm, double n_eff, Polarization pol,
                         Parity parity, const ModeSolverOptions& opts) {
  const double dx = opts.grid_step_nm;
  HalfField h;
  double u = parity == Parity::even ? 1.0 : 0.0;
  double v = parity == Parity::even ? 0.0 : 1.0;
  double x_in = 0.0;
  for (const auto& s : r.half) {
    const double w = weight(s.index, pol);
    for (double x : slice_nodes(x_in, s.thickness, dx)) {
      const auto m = layer_matrix_real(s.index, x - x_in, lambda_nm, n_eff, pol);
      h.x.push_back(x);
      h.u.push_back(m.m11 * u + m.m12 * v);
      h.v.push_back(m.m21 * u + m.m22 * v);
      h.w.push_back(w);
    }
    u = h.u.back();
    v = h.v.back();
    x_in += s.thickness;
  }
  // The exterior is radiative for a Bragg mode; the profile stops at the
  // cladding edge, where the amplitude is |mu|^N of the core value.
  return normalize_profile(mirror(h, parity, dx));
}

ModeSolution make_solution(double lambda_nm, Polarization pol, ModeKind kind, Parity parity,
                           double n_eff, double residual) {
  ModeSolution m;
  m.lambda_nm = lambda_nm;
  m.pol = pol;
  m.kind = kind;
  m.parity = parity;
  m.n_eff = n_eff;
  m.beta_rad_per_um = beta_rad_per_um(n_eff, lambda_nm);
  m.leakage_residual = residual;
  return m;
}

}  // namespace

std::pair<double, double> tir_window(const LayerStack& stack, double lambda_nm) {
  const double nc = stack.core.index(lambda_nm);
  const double n1 = stack.bilayer[0].index(lambda_nm);
  const double n2 = stack.bilayer[1].index(lambda_nm);
  const double ne = stack.exterior->index(lambda_nm);
  return {std::max(ne, std::min(n1, n2)), nc};
}

double tir_dispersion(const LayerStack& stack, double lambda_nm, double n_eff, Polarization pol,
                      Parity parity) {
  return tir_dispersion_resolved(resolve(stack, lambda_nm), lambda_nm, n_eff, pol, parity);
}

std::vector<ModeSolution> find_tir_modes(const LayerStack& stack, double lambda_nm,
                                         Polarization pol, const ModeSolverOptions& opts) {
  const auto r = resolve(stack, lambda_nm);
  auto [lo, hi] = tir_window(stack, lambda_nm);
  std::vector<ModeSolution> modes;
  if (!(hi > lo)) return modes;

  double scan_lo = lo, scan_hi = hi;
  if (opts.n_eff_hint) {
    scan_lo = std::max(lo, *opts.n_eff_hint - opts.hint_window);
    scan_hi = std::min(hi, *opts.n_eff_hint + opts.hint_window);
  }
  for (Parity parity : {Parity::even, Parity::odd}) {
    auto roots = tir_roots(r, lambda_nm, pol, parity, scan_lo, scan_hi, opts);
    for (double n : roots) {
      const double res = std::abs(tir_dispersion_resolved(r, lambda_nm, n, pol, parity));
      modes.push_back(make_solution(lambda_nm, pol, ModeKind::TIR, parity, n, res));
    }
  }
  if (modes.empty() && opts.n_eff_hint) {
    auto full = opts;
    full.n_eff_hint.reset();
    return find_tir_modes(stack, lambda_nm, pol, full);
  }
  std::sort(modes.begin(), modes.end(),
            [](const ModeSolution& a, const ModeSolution& b) { return a.n_eff > b.n_eff; });
  if (opts.with_profile) {
    for (auto& m : modes) m.profile = tir_profile(r, lambda_nm, m.n_eff, pol, m.parity, opts);
  }
  return modes;
}

ModeSolution find_brw_mode(const LayerStack& stack, double lambda_nm, Polarization pol,
                           Parity parity, const ModeSolverOptions& opts) {
  const auto r = resolve(stack, lambda_nm);
  const double hi = std::min({r.n_core, r.n1, r.n2});
  const double lo = opts.brw_floor;

  BrwScan scan;
  std::optional<BrwRoot> pick;
  if (opts.n_eff_hint) {
    const double a = std::max(lo, *opts.n_eff_hint - opts.hint_window);
    const double b = std::min(hi, *opts.n_eff_hint + opts.hint_window);
    scan = brw_scan(r, stack, lambda_nm, pol, parity, a, b, false, opts);
    for (const auto& root : scan.roots) {
      if (!pick || std::abs(root.n_eff - *opts.n_eff_hint) < std::abs(pick->n_eff - *opts.n_eff_hint)) {
        pick = root;
      }
    }
  }
  if (!pick) {
    scan = brw_scan(r, stack, lambda_nm, pol, parity, lo, hi, true, opts);
    for (const auto& root : scan.roots) {
      if (!pick || root.n_eff > pick->n_eff) pick = root;
    }
  }
  if (!pick) {
    std::ostringstream os;
    os << "no " << to_string(parity) << " Bragg mode at " << lambda_nm << " nm (" << to_string(pol)
       << "); ";
    if (std::isnan(scan.gap_hi)) {
      os << "no stop band for n_eff in [" << lo << ", " << hi << "]";
    } else {
      os << "scanned stop band n_eff in [" << scan.gap_lo << ", " << scan.gap_hi << "]";
    }
    throw NotFoundError(os.str());
  }

  const auto bloch = bloch_analyze(stack.bilayer, lambda_nm, pick->n_eff, pol);
  if (!bloch.in_stop_band || !(pick->n_eff < hi)) {
    throw NumericFailure("Bragg root left the stop band", pick->n_eff, pick->n_eff);
  }
  auto m = make_solution(lambda_nm, pol, ModeKind::BRW, parity, pick->n_eff,
                         std::pow(std::abs(pick->mu), stack.n_bilayers));
  if (opts.with_profile) m.profile = brw_profile(r, lambda_nm, m.n_eff, pol, parity, opts);
  return m;
}

ModeSolution solve_mode(const LayerStack& stack, double lambda_nm, Polarization pol,
                        const ModeFamily& family, const ModeSolverOptions& opts) {
  if (family.kind == ModeKind::BRW) return find_brw_mode(stack, lambda_nm, pol, family.parity, opts);

  if (family.order < 0) throw NotFoundError("TIR mode order must be >= 0");
  if (opts.n_eff_hint) {
    auto modes = find_tir_modes(stack, lambda_nm, pol, opts);
    std::vector<ModeSolution> same;
    for (auto& m : modes) {
      if (m.parity == family.parity) same.push_back(std::move(m));
    }
    if (!same.empty()) {
      auto best = std::min_element(same.begin(), same.end(), [&](const auto& a, const auto& b) {
        return std::abs(a.n_eff - *opts.n_eff_hint) < std::abs(b.n_eff - *opts.n_eff_hint);
      });
      return std::move(*best);
    }
  }

  const auto r = resolve(stack, lambda_nm);
  auto [lo, hi] = tir_window(stack, lambda_nm);
  const auto want = static_cast<std::size_t>(family.order) + 1;
  const auto roots = hi > lo ? tir_roots(r, lambda_nm, pol, family.parity, lo, hi, opts, want)
                             : std::vector<double>{};
  if (roots.size() < want) {
    std::ostringstream os;
    os << "no " << to_string(family) << " TIR mode at " << lambda_nm << " nm (" << to_string(pol)
       << "); " << roots.size() << " mode(s) of that parity in n_eff window (" << lo << ", " << hi
       << ")";
    throw NotFoundError(os.str());
  }
  const double n = roots[want - 1];
  auto m = make_solution(lambda_nm, pol, ModeKind::TIR, family.parity, n,
                         std::abs(tir_dispersion_resolved(r, lambda_nm, n, pol, family.parity)));
  if (opts.with_profile) m.profile = tir_profile(r, lambda_nm, n, pol, family.parity, opts);
  return m;
}

}  // namespace brwspdc
