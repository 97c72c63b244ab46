#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brwspdc/phasematch.hpp"

namespace brwspdc {

// Triple-product overlap of normalized profiles, in nm^-1/2. Profiles are
// resampled by linear interpolation onto the union of their grids. With a
// window, only [window.first, window.second] contributes. PreconditionError
// if any profile deviates from unit norm by more than norm_tol.
double overlap_integral(const FieldProfile& p, const FieldProfile& s, const FieldProfile& i,
                        std::optional<std::pair<double, double>> window = std::nullopt,
                        double norm_tol = 1e-6);

struct SpdcConfig {
  double length_mm = 15.0;
  double pump_power_mw_per_um = 1.0;
  // When unset, the device stack's period is used.
  std::optional<double> period_um;
  // Nonlinearity confined to the core; otherwise integrate over all layers.
  bool core_only_overlap = true;
  Execution exec = Execution::serial;
};

struct SpdcPoint {
  double lambda_p_nm = 0.0;
  double lambda_s_nm = 0.0;
  double lambda_i_nm = 0.0;
  double n_p = 0.0;
  double n_s = 0.0;
  double n_i = 0.0;
  double overlap_per_sqrt_um = 0.0;
  double delta_beta = 0.0;   // rad/um, grating included
  double prefactor = 0.0;    // density at delta_beta = 0, W/nm
  double density = 0.0;      // W/nm
};

double sinc(double x);

// Signal spectral power density at one (lambda_p, lambda_s) point. The
// value is in W/nm for a pump of config.pump_power_mw_per_um, with the
// pump power taken per unit transverse width.
SpdcPoint spectral_density(const Device& device, const SpdcConfig& config, double lambda_p_nm,
                           double lambda_s_nm);

struct SpdcSpectrum {
  std::string swept;  // "lambda_p" or "lambda_s"
  double pivot_nm = 0.0;
  std::vector<double> grid_nm;
  std::vector<double> density;  // W/nm; NaN marks a gap
  std::vector<std::string> gap_reasons;  // parallel to grid, empty when solved
  double peak = 0.0;
  double peak_at_nm = 0.0;
  std::optional<double> fwhm_nm;
  std::string fwhm_status;  // "ok", "unbounded-in-window" or "gap-in-half-max-region"
};

// Full width at half maximum by linear interpolation of the half-peak
// crossings; fills peak, peak_at_nm, fwhm_nm and fwhm_status.
void analyze_spectrum(SpdcSpectrum& spectrum);

SpdcSpectrum pump_sweep(const Device& device, const SpdcConfig& config, double lambda_s_nm,
                        const std::vector<double>& lambda_p_nm);

SpdcSpectrum signal_sweep(const Device& device, const SpdcConfig& config, double lambda_p_nm,
                          const std::vector<double>& lambda_s_nm);

// Pairs per second in [center - width/2, center + width/2]: trapezoidal
// integral of the spectrum (window ends interpolated) divided by hc/center.
// RangeError if the window leaves the grid or meets a gap.
double pair_flux(const SpdcSpectrum& spectrum, double center_nm, double width_nm);

}  // namespace brwspdc
