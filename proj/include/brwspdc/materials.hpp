#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace brwspdc {

struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;     // J s
  static constexpr double h = 6.62607015e-34;         // J s
  static constexpr double c = 299792458.0;            // m / s
  static constexpr double epsilon0 = 8.8541878128e-12;  // F / m
};

struct DispersionParam {
  std::string name;
  double value = 0.0;
};

/// Lossless material: refractive index from a Sellmeier law
///
///   n^2(lambda) = A + sum_k B_k lambda^2 / (lambda^2 - C_k^2),  lambda in um,
///
/// plus the d33 nonlinear coefficient. Parameters are named "A", "B1",
/// "C1_um", "B2", "C2_um", ... ; a bare "A" gives a dispersionless medium.
class MaterialModel {
 public:
  MaterialModel(std::string name, double al_fraction, std::vector<DispersionParam> params,
                std::pair<double, double> valid_range_nm, double d33_pm_per_V);

  // Constant-index medium valid over [lo, hi] nm.
  static MaterialModel constant(std::string name, double index, double lo_nm = 200.0,
                                double hi_nm = 5000.0, double d33_pm_per_V = 0.0);

  const std::string& name() const { return name_; }
  double al_fraction() const { return al_fraction_; }
  const std::vector<DispersionParam>& dispersion_params() const { return params_; }
  std::pair<double, double> valid_range() const { return range_; }
  double d33() const { return d33_; }

  bool in_range(double lambda_nm) const {
    return lambda_nm >= range_.first && lambda_nm <= range_.second;
  }

  // Throws RangeError outside valid_range().
  double index(double lambda_nm) const;

 private:
  struct Term {
    double b;
    double c2;  // um^2
  };

  std::string name_;
  double al_fraction_;
  std::vector<DispersionParam> params_;
  std::pair<double, double> range_;
  double d33_;
  double a_ = 1.0;
  std::vector<Term> terms_;
};

using MaterialPtr = std::shared_ptr<const MaterialModel>;

double refractive_index(const MaterialModel& model, double lambda_nm);

// Effective nonlinear coefficient for first-order QPM, (2/pi) d33, in pm/V.
double d_eff(const MaterialModel& model);

class MaterialLibrary {
 public:
  void add(MaterialModel model);
  MaterialPtr get(const std::string& name) const;  // ConfigError if unknown
  bool contains(const std::string& name) const { return models_.count(name) > 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, MaterialPtr> models_;
};

}  // namespace brwspdc
