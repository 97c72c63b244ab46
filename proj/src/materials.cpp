#include "brwspdc/materials.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "brwspdc/errors.hpp"

namespace brwspdc {

namespace {

const DispersionParam* find_param(const std::vector<DispersionParam>& params,
                                  const std::string& key) {
  for (const auto& p : params) {
    if (p.name == key) return &p;
  }
  return nullptr;
}

}  // namespace

MaterialModel::MaterialModel(std::string name, double al_fraction,
                             std::vector<DispersionParam> params,
                             std::pair<double, double> valid_range_nm, double d33_pm_per_V)
    : name_(std::move(name)),
      al_fraction_(al_fraction),
      params_(std::move(params)),
      range_(valid_range_nm),
      d33_(d33_pm_per_V) {
  if (!(al_fraction_ >= 0.0 && al_fraction_ <= 1.0)) {
    throw ConfigError("material '" + name_ + "': al_fraction must lie in [0, 1]");
  }
  if (!(range_.first > 0.0 && range_.second > range_.first)) {
    throw ConfigError("material '" + name_ + "': invalid valid_range_nm");
  }
  const auto* a = find_param(params_, "A");
  if (a == nullptr) throw ConfigError("material '" + name_ + "': missing Sellmeier term A");
  a_ = a->value;

  std::size_t matched = 1;
  for (int k = 1;; ++k) {
    const auto* b = find_param(params_, "B" + std::to_string(k));
    const auto* c = find_param(params_, "C" + std::to_string(k) + "_um");
    if (b == nullptr && c == nullptr) break;
    if (b == nullptr || c == nullptr) {
      throw ConfigError("material '" + name_ + "': Sellmeier term " + std::to_string(k) +
                        " needs both B and C");
    }
    terms_.push_back({b->value, c->value * c->value});
    matched += 2;
  }
  if (matched != params_.size()) {
    throw ConfigError("material '" + name_ + "': unrecognized dispersion parameter");
  }
}

MaterialModel MaterialModel::constant(std::string name, double index, double lo_nm,
                                      double hi_nm, double d33_pm_per_V) {
  return MaterialModel(std::move(name), 0.0, {{"A", index * index}}, {lo_nm, hi_nm},
                       d33_pm_per_V);
}

double MaterialModel::index(double lambda_nm) const {
  if (!in_range(lambda_nm)) {
    std::ostringstream os;
    os << "material '" << name_ << "': wavelength " << lambda_nm
       << " nm outside valid range [" << range_.first << ", " << range_.second << "] nm";
    throw RangeError(os.str());
  }
  const double l2 = (lambda_nm * 1e-3) * (lambda_nm * 1e-3);
  double n2 = a_;
  for (const auto& t : terms_) n2 += t.b * l2 / (l2 - t.c2);
  if (!(n2 > 1.0)) {
    throw RangeError("material '" + name_ + "': dispersion law gives n <= 1 at " +
                     std::to_string(lambda_nm) + " nm");
  }
  return std::sqrt(n2);
}

double refractive_index(const MaterialModel& model, double lambda_nm) {
  return model.index(lambda_nm);
}

double d_eff(const MaterialModel& model) { return 2.0 / std::numbers::pi * model.d33(); }

void MaterialLibrary::add(MaterialModel model) {
  auto name = model.name();
  models_[name] = std::make_shared<const MaterialModel>(std::move(model));
}

MaterialPtr MaterialLibrary::get(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw ConfigError("unknown material '" + name + "'");
  return it->second;
}

std::vector<std::string> MaterialLibrary::names() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& [k, v] : models_) out.push_back(k);
  return out;
}

}  // namespace brwspdc
