#include "brwspdc/stack.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "brwspdc/errors.hpp"

namespace brwspdc {

std::string to_string(Polarization pol) { return pol == Polarization::TE ? "TE" : "TM"; }

Polarization parse_polarization(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "te") return Polarization::TE;
  if (t == "tm") return Polarization::TM;
  throw ConfigError("unknown polarization '" + text + "' (expected te or tm)");
}

void LayerStack::validate() const {
  auto check_layer = [this](const Layer& l, const char* what) {
    if (!l.material) throw ConfigError("stack '" + name + "': " + what + " has no material");
    if (!(l.thickness_nm > 0.0) || !std::isfinite(l.thickness_nm)) {
      throw ConfigError("stack '" + name + "': " + what + " thickness must be positive");
    }
  };
  check_layer(core, "core");
  check_layer(bilayer[0], "bilayer layer 1");
  check_layer(bilayer[1], "bilayer layer 2");
  if (n_bilayers < 1) throw ConfigError("stack '" + name + "': n_bilayers must be >= 1");
  if (!exterior) throw ConfigError("stack '" + name + "': missing exterior material");
  if (qpm_period_um && !(*qpm_period_um > 0.0)) {
    throw ConfigError("stack '" + name + "': qpm_period_um must be positive");
  }
  if (!symmetric) throw ConfigError("stack '" + name + "': only symmetric stacks are supported");
}

LayerStack LayerStack::with_core_thickness(double d_nm) const {
  LayerStack s = *this;
  s.core.thickness_nm = d_nm;
  return s;
}

LayerStack LayerStack::with_bilayer_thicknesses(double d1_nm, double d2_nm) const {
  LayerStack s = *this;
  s.bilayer[0].thickness_nm = d1_nm;
  s.bilayer[1].thickness_nm = d2_nm;
  return s;
}

LayerStack LayerStack::with_bilayer_count(int n) const {
  LayerStack s = *this;
  s.n_bilayers = n;
  return s;
}

double LayerStack::cladding_thickness() const {
  return n_bilayers * (bilayer[0].thickness_nm + bilayer[1].thickness_nm);
}

std::vector<Layer> LayerStack::half_layers() const {
  std::vector<Layer> out;
  out.reserve(1 + 2 * static_cast<std::size_t>(std::max(n_bilayers, 0)));
  out.push_back({core.material, 0.5 * core.thickness_nm});
  for (int k = 0; k < n_bilayers; ++k) {
    out.push_back(bilayer[0]);
    out.push_back(bilayer[1]);
  }
  return out;
}

TransferMatrix TransferMatrix::identity(Polarization pol, double lambda_nm, double n_eff) {
  TransferMatrix m;
  m.pol = pol;
  m.lambda_nm = lambda_nm;
  m.n_eff = n_eff;
  return m;
}

TransferMatrix TransferMatrix::inverse() const {
  TransferMatrix r = *this;
  r.m11 = m22;
  r.m12 = -m12;
  r.m21 = -m21;
  r.m22 = m11;
  return r;
}

TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
  TransferMatrix r = a;
  r.m11 = a.m11 * b.m11 + a.m12 * b.m21;
  r.m12 = a.m11 * b.m12 + a.m12 * b.m22;
  r.m21 = a.m21 * b.m11 + a.m22 * b.m21;
  r.m22 = a.m21 * b.m12 + a.m22 * b.m22;
  return r;
}

double transverse_k2(double index, double lambda_nm, double n_eff) {
  const double k0 = 2.0 * std::numbers::pi / lambda_nm;
  return k0 * k0 * (index - n_eff) * (index + n_eff);
}

RealMatrix2 layer_matrix_real(double index, double thickness_nm, double lambda_nm, double n_eff,
                              Polarization pol) {
  const double k2 = transverse_k2(index, lambda_nm, n_eff);
  const double d = thickness_nm;
  const double w = pol == Polarization::TM ? index * index : 1.0;

  // c = cos(kd), s = sin(kd)/k, continued analytically through k^2 = 0.
  double c = 1.0;
  double s = d;
  const double x2 = k2 * d * d;
  if (std::abs(x2) < 1e-12) {
    c = 1.0 - 0.5 * x2;
    s = d * (1.0 - x2 / 6.0);
  } else if (k2 > 0.0) {
    const double k = std::sqrt(k2);
    c = std::cos(k * d);
    s = std::sin(k * d) / k;
  } else {
    const double g = std::sqrt(-k2);
    c = std::cosh(g * d);
    s = std::sinh(g * d) / g;
  }
  return {c, w * s, -k2 * s / w, c};
}

TransferMatrix layer_matrix(double index, double thickness_nm, double lambda_nm, double n_eff,
                            Polarization pol) {
  const auto r = layer_matrix_real(index, thickness_nm, lambda_nm, n_eff, pol);
  TransferMatrix m;
  m.pol = pol;
  m.lambda_nm = lambda_nm;
  m.n_eff = n_eff;
  m.m11 = r.m11;
  m.m12 = r.m12;
  m.m21 = r.m21;
  m.m22 = r.m22;
  return m;
}

TransferMatrix layer_matrix(const Layer& layer, double lambda_nm, double n_eff, Polarization pol) {
  return layer_matrix(layer.index(lambda_nm), layer.thickness_nm, lambda_nm, n_eff, pol);
}

TransferMatrix bilayer_matrix(const std::array<Layer, 2>& bilayer, double lambda_nm,
                              double n_eff, Polarization pol) {
  return layer_matrix(bilayer[1], lambda_nm, n_eff, pol) *
         layer_matrix(bilayer[0], lambda_nm, n_eff, pol);
}

namespace {

TransferMatrix power(TransferMatrix base, int n) {
  auto result = TransferMatrix::identity(base.pol, base.lambda_nm, base.n_eff);
  // Ordered left-to-right product; n is small so repeated multiplication keeps
  // the rounding identical to an explicit layer-by-layer walk.
  for (int k = 0; k < n; ++k) result = base * result;
  return result;
}

}  // namespace

TransferMatrix stack_matrix(const LayerStack& stack, double lambda_nm, double n_eff,
                            Polarization pol, StackSide side) {
  const auto out = bilayer_matrix(stack.bilayer, lambda_nm, n_eff, pol);
  const auto half = power(out, stack.n_bilayers);
  if (side == StackSide::half) return half;

  // Left cladding, traversed left to right, meets bilayer[1] first.
  const auto in = layer_matrix(stack.bilayer[0], lambda_nm, n_eff, pol) *
                  layer_matrix(stack.bilayer[1], lambda_nm, n_eff, pol);
  const auto left = power(in, stack.n_bilayers);
  const auto core = layer_matrix(stack.core, lambda_nm, n_eff, pol);
  return half * core * left;
}

BlochAnalysis bloch_analyze(const std::array<Layer, 2>& bilayer, double lambda_nm, double n_eff,
                            Polarization pol) {
  const auto t = bilayer_matrix(bilayer, lambda_nm, n_eff, pol);
  const Complex h = t.half_trace();
  const Complex root = std::sqrt(h * h - 1.0);
  Complex mu1 = h + root;
  Complex mu2 = h - root;
  if (std::abs(mu1) > std::abs(mu2)) std::swap(mu1, mu2);
  // Inside an allowed band both have modulus 1; pick Im(mu) >= 0 for a stable choice.
  if (std::abs(std::abs(mu1) - std::abs(mu2)) < 1e-14 && mu1.imag() < 0.0) std::swap(mu1, mu2);

  BlochAnalysis b;
  b.lambda_nm = lambda_nm;
  b.n_eff = n_eff;
  b.bloch_factor = mu1;
  b.other_eigenvalue = mu2;
  b.band_center_detuning = h.real();
  b.in_stop_band = std::abs(h.real()) > 1.0;
  return b;
}

}  // namespace brwspdc
