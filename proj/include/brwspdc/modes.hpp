#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brwspdc/execution.hpp"
#include "brwspdc/stack.hpp"

namespace brwspdc {

enum class ModeKind { TIR, BRW };
enum class Parity { even, odd };

std::string to_string(ModeKind kind);
std::string to_string(Parity parity);

/// Sampled transverse field on a layer-conforming grid. Nodes are spaced at
/// most `dx_nm` apart inside each layer; every interface appears twice (left
/// and right limit) so that TM discontinuities of E_x are represented exactly.
/// `field` is E (E_y for TE, E_x for TM); `derivative` holds the continuous
/// companion V = (1/w) dU/dx with the same scale factor.
struct FieldProfile {
  std::vector<double> x_nm;
  std::vector<double> field;
  std::vector<double> derivative;
  double dx_nm = 1.0;

  std::size_t size() const { return x_nm.size(); }
  bool empty() const { return x_nm.empty(); }
  // Trapezoidal integral of E^2 over the stored grid.
  double norm_sq() const;
  // Piecewise-linear evaluation; 0 outside the grid. At a duplicated node the
  // left (right) limit is returned.
  double value_left(double x) const;
  double value_right(double x) const;
};

// Scaled copy with unit L2 norm. Sign: E(0) >= 0 for even profiles, positive
// slope at the center for odd ones. PreconditionError on an all-zero field.
FieldProfile normalize_profile(const FieldProfile& profile);

struct ModeSolution {
  double lambda_nm = 0.0;
  Polarization pol = Polarization::TM;
  ModeKind kind = ModeKind::TIR;
  Parity parity = Parity::even;
  double n_eff = 0.0;
  double beta_rad_per_um = 0.0;
  // TIR: |dispersion function| at the refined root. BRW: |mu|^n_bilayers,
  // the amplitude fraction reaching the exterior.
  double leakage_residual = 0.0;
  FieldProfile profile;
};

struct ModeSolverOptions {
  double scan_step = 1e-4;     // n_eff grid for sign-change detection
  double root_tol = 1e-12;     // final bisection bracket width in n_eff
  double grid_step_nm = 1.0;   // profile sampling
  double tail_max_nm = 2000.0;
  double tail_floor = 1e-6;    // tail stops once |E| < tail_floor * max|E|
  double brw_floor = 1.0;      // lowest n_eff scanned for Bragg modes
  bool with_profile = true;
  std::optional<double> n_eff_hint;  // pick the root nearest this value
  double hint_window = 5e-3;
  Execution scan = Execution::serial;
};

double beta_rad_per_um(double n_eff, double lambda_nm);

// Admissible n_eff window (lo, hi) for TIR modes at lambda.
std::pair<double, double> tir_window(const LayerStack& stack, double lambda_nm);

// Dispersion function whose zeros are TIR modes of the given parity. Exposed
// for tests and the benchmark; dimensionless and continuous in n_eff.
double tir_dispersion(const LayerStack& stack, double lambda_nm, double n_eff, Polarization pol,
                      Parity parity);

// All TIR modes, both parities, sorted by descending n_eff.
std::vector<ModeSolution> find_tir_modes(const LayerStack& stack, double lambda_nm,
                                         Polarization pol, const ModeSolverOptions& opts = {});

// Bragg mode of the requested parity in the first stop band below the lowest
// layer index. NotFoundError if no such solution exists.
ModeSolution find_brw_mode(const LayerStack& stack, double lambda_nm, Polarization pol,
                           Parity parity, const ModeSolverOptions& opts = {});

struct ModeFamily {
  ModeKind kind = ModeKind::TIR;
  Parity parity = Parity::even;
  int order = 0;  // TIR only: 0 = highest n_eff of this parity
};

std::string to_string(const ModeFamily& family);

ModeSolution solve_mode(const LayerStack& stack, double lambda_nm, Polarization pol,
                        const ModeFamily& family, const ModeSolverOptions& opts = {});

}  // namespace brwspdc
