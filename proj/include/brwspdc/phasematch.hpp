#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brwspdc/modes.hpp"

namespace brwspdc {

enum class Role { pump, signal, idler };

std::string to_string(Role role);

/// A stack together with the mode family each of the three waves occupies.
/// All three share one polarization (type-0 interaction).
struct Device {
  LayerStack stack;
  Polarization pol = Polarization::TM;
  ModeFamily pump{ModeKind::TIR, Parity::even, 0};
  ModeFamily signal{ModeKind::TIR, Parity::even, 0};
  ModeFamily idler{ModeKind::TIR, Parity::even, 0};
  ModeSolverOptions solver;

  // Grating period as written in the stack file. When `qpm_design_point` is
  // set, stack.qpm_period_um is replaced by the first-order period that phase
  // matches this (lambda_p, lambda_s) pair for the loaded materials.
  std::optional<double> nominal_qpm_period_um;
  std::optional<std::pair<double, double>> qpm_design_point;

  const ModeFamily& family(Role role) const;
  double period_um() const;  // PreconditionError when no period is set
};

double idler_wavelength(double lambda_p_nm, double lambda_s_nm);

// n_eff of a role's mode at lambda, without a profile.
double mode_index(const Device& device, Role role, double lambda_nm);

struct DispersionCurve {
  ModeFamily family;
  Polarization pol = Polarization::TM;
  std::vector<double> lambda_nm;
  std::vector<double> n_eff;
  std::vector<double> beta_rad_per_um;
};

struct DispersionOptions {
  // Largest n_eff change between neighbouring grid points before the family
  // is declared lost.
  double max_jump = 2e-3;
  Execution exec = Execution::serial;
};

DispersionCurve build_dispersion(const LayerStack& stack, Polarization pol,
                                 const ModeFamily& family, const std::vector<double>& lambda_nm,
                                 const ModeSolverOptions& solver = {},
                                 const DispersionOptions& opts = {});

struct QpmSolution {
  double lambda_p_nm = 0.0;
  double lambda_s_nm = 0.0;
  double lambda_i_nm = 0.0;
  double period_um = 0.0;
  double delta_beta = 0.0;  // rad/um, at the returned period
  double n_p = 0.0;
  double n_s = 0.0;
  double n_i = 0.0;
};

QpmSolution qpm_period(const Device& device, double lambda_p_nm, double lambda_s_nm);

// Replaces stack.qpm_period_um according to qpm_design_point (no-op when unset).
void resolve_qpm_period(Device& device);

// beta_p - beta_s - beta_i - 2 pi / period, rad/um.
double phase_mismatch(const Device& device, double lambda_p_nm, double lambda_s_nm,
                      double period_um);

struct MismatchCurve {
  double lambda_s_nm = 0.0;
  std::vector<double> lambda_p_nm;
  std::vector<double> beta_diff;    // beta_p - beta_i, rad/um
  std::vector<double> derivative;   // d(beta_p - beta_i)/d(lambda_p), rad/um per nm
  std::optional<double> zero_crossing_nm;
};

// Central differences with step equal to the grid step (the grid must be
// uniform); the two points just outside the grid are solved for the ends.
MismatchCurve pump_idler_mismatch_curve(const Device& device, const std::vector<double>& lambda_p_nm,
                                        double lambda_s_nm, Execution exec = Execution::serial);

// Derivative of beta_p - beta_i at a single pump wavelength, central step h.
double mismatch_slope(const Device& device, double lambda_p_nm, double lambda_s_nm,
                      double step_nm = 0.1);

struct TuningPoint {
  double lambda_p_nm = 0.0;
  double lambda_s_nm = 0.0;
  double lambda_i_nm = 0.0;
  double delta_beta = 0.0;
};

struct TuningOptions {
  double signal_lo_nm = 1400.0;
  double signal_hi_nm = 1700.0;
  double widen_step_nm = 50.0;
  double widest_lo_nm = 1300.0;
  double widest_hi_nm = 1900.0;
  double scan_step_nm = 5.0;
  double tolerance = 1e-8;     // |delta beta|, rad/um
  double reference_nm = 1550;  // picks among several roots
  Execution exec = Execution::serial;
};

struct TuningCurve {
  double period_um = 0.0;
  std::vector<TuningPoint> points;
  std::vector<double> gaps_nm;  // pump wavelengths without a root
  std::vector<std::string> gap_reasons;
};

TuningCurve tuning_curve(const Device& device, double period_um,
                         const std::vector<double>& lambda_p_nm, const TuningOptions& opts = {});

// Single phase-matched signal wavelength at one pump wavelength.
TuningPoint phase_matched_signal(const Device& device, double period_um, double lambda_p_nm,
                                 const TuningOptions& opts = {});

struct QuarterWave {
  double d1_nm = 0.0;
  double d2_nm = 0.0;
};

QuarterWave quarter_wave_design(double lambda_i_nm, double n_eff, double n1, double n2);
QuarterWave quarter_wave_design(double lambda_i_nm, double n_eff, const MaterialModel& m1,
                                const MaterialModel& m2);

struct FixedPointStep {
  double n_eff = 0.0;
  double d1_nm = 0.0;
  double d2_nm = 0.0;
};

struct QuarterWaveFixedPoint {
  LayerStack stack;  // with converged cladding thicknesses
  double n_eff = 0.0;
  std::vector<FixedPointStep> trace;
};

// Alternates Bragg solve and quarter-wave thickness update until n_eff moves
// by less than tol. NumericFailure after max_iter iterations.
QuarterWaveFixedPoint quarter_wave_fixed_point(const LayerStack& stack, double lambda_i_nm,
                                               Polarization pol, Parity parity,
                                               const ModeSolverOptions& solver = {},
                                               double tol = 1e-8, int max_iter = 20);

struct CoreSearchOptions {
  bool co_design_cladding = true;  // re-run the quarter-wave fixed point at each d_c
  double coarse_step_nm = 10.0;
  double tol_nm = 0.01;
  double slope_step_nm = 0.1;
};

struct CoreSearchSample {
  double d_c_nm = 0.0;
  double d1_nm = 0.0;
  double d2_nm = 0.0;
  double slope = 0.0;
};

struct CoreSearchResult {
  Device device;  // with the chosen core and cladding
  double d_c_nm = 0.0;
  double idler_n_eff = 0.0;
  std::vector<CoreSearchSample> trace;
};

CoreSearchResult core_thickness_search(const Device& device, double lambda_p_nm,
                                       double lambda_s_nm, double d_c_lo_nm, double d_c_hi_nm,
                                       const CoreSearchOptions& opts = {});

}  // namespace brwspdc
