#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brwspdc/materials.hpp"

namespace brwspdc {

enum class Polarization { TE, TM };

std::string to_string(Polarization pol);
Polarization parse_polarization(const std::string& text);  // "te"/"tm", case-insensitive

struct Layer {
  MaterialPtr material;
  double thickness_nm = 0.0;

  double index(double lambda_nm) const { return material->index(lambda_nm); }
};

/// Symmetric planar stack: core, then `n_bilayers` copies of (bilayer[0],
/// bilayer[1]) on each side going outward, then a semi-infinite exterior.
/// The coordinate origin is the core center.
struct LayerStack {
  std::string name;
  Layer core;
  std::array<Layer, 2> bilayer;
  int n_bilayers = 1;
  MaterialPtr exterior;
  std::optional<double> qpm_period_um;
  bool symmetric = true;

  void validate() const;  // ConfigError on violated invariants

  LayerStack with_core_thickness(double d_nm) const;
  LayerStack with_bilayer_thicknesses(double d1_nm, double d2_nm) const;
  LayerStack with_bilayer_count(int n) const;

  // Thickness of one cladding side, nm.
  double cladding_thickness() const;
  // Layers from the core center outward: half core, then the cladding.
  std::vector<Layer> half_layers() const;
};

using Complex = std::complex<double>;

// Field state in the (U, V) basis: U is the tangential field (E_y for TE,
// H_y for TM) and V = (1/w) dU/dx with w = 1 (TE) or n^2 (TM), x in nm.
// Both components are continuous across every interface.
struct FieldState {
  Complex u{1.0, 0.0};
  Complex v{0.0, 0.0};
};

struct TransferMatrix {
  Complex m11{1.0, 0.0};
  Complex m12{0.0, 0.0};
  Complex m21{0.0, 0.0};
  Complex m22{1.0, 0.0};
  Polarization pol = Polarization::TE;
  double lambda_nm = 0.0;
  double n_eff = 0.0;

  static TransferMatrix identity(Polarization pol, double lambda_nm, double n_eff);

  Complex det() const { return m11 * m22 - m12 * m21; }
  Complex half_trace() const { return 0.5 * (m11 + m22); }
  TransferMatrix inverse() const;  // unimodular inverse
  FieldState apply(const FieldState& s) const {
    return {m11 * s.u + m12 * s.v, m21 * s.u + m22 * s.v};
  }
};

// `a * b` applies b first, then a.
TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b);

struct BlochAnalysis {
  double lambda_nm = 0.0;
  double n_eff = 0.0;
  Complex bloch_factor;       // eigenvalue of the bilayer matrix with |mu| <= 1
  Complex other_eigenvalue;   // 1 / bloch_factor
  bool in_stop_band = false;
  double band_center_detuning = 0.0;  // Re(trace)/2; +-1 at band edges
};

// Squared transverse wavenumber (rad/nm)^2; negative for evanescent layers.
double transverse_k2(double index, double lambda_nm, double n_eff);

// Real-valued layer matrix for lossless media; the kernel behind layer_matrix.
// Negative thickness gives the inverse (propagation toward -x).
struct RealMatrix2 {
  double m11 = 1.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 1.0;
};

RealMatrix2 layer_matrix_real(double index, double thickness_nm, double lambda_nm, double n_eff,
                              Polarization pol);

TransferMatrix layer_matrix(const Layer& layer, double lambda_nm, double n_eff, Polarization pol);
// Same, with the index supplied directly (used by the solvers' inner loops).
TransferMatrix layer_matrix(double index, double thickness_nm, double lambda_nm, double n_eff,
                            Polarization pol);

enum class StackSide { half, full };

// half: core boundary outward through the n_bilayers bilayers of one side.
// full: left exterior boundary to right exterior boundary, core included.
TransferMatrix stack_matrix(const LayerStack& stack, double lambda_nm, double n_eff,
                            Polarization pol, StackSide side);

TransferMatrix bilayer_matrix(const std::array<Layer, 2>& bilayer, double lambda_nm,
                              double n_eff, Polarization pol);

BlochAnalysis bloch_analyze(const std::array<Layer, 2>& bilayer, double lambda_nm, double n_eff,
                            Polarization pol);

}  // namespace brwspdc
