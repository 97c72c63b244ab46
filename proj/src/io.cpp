#include "brwspdc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "brwspdc/errors.hpp"

namespace brwspdc {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path default_data_dir() { return fs::path(BRWSPDC_DATA_DIR); }

fs::path default_materials_path() {
  if (const char* env = std::getenv("BRWSPDC_MATERIALS"); env && *env) return fs::path(env);
  return default_data_dir() / "materials.json";
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "': file not found or unreadable");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad '" + key + "': " + e.what());
  }
}

ModeFamily parse_family(const json& j, const std::string& where) {
  ModeFamily f;
  const auto kind = field<std::string>(j, "kind", where);
  if (kind == "TIR" || kind == "tir") {
    f.kind = ModeKind::TIR;
  } else if (kind == "BRW" || kind == "brw") {
    f.kind = ModeKind::BRW;
  } else {
    throw ConfigError(where + ": kind must be TIR or BRW");
  }
  const auto parity = j.value("parity", std::string("even"));
  if (parity == "even") {
    f.parity = Parity::even;
  } else if (parity == "odd") {
    f.parity = Parity::odd;
  } else {
    throw ConfigError(where + ": parity must be even or odd");
  }
  f.order = j.value("order", 0);
  if (f.order < 0) throw ConfigError(where + ": order must be >= 0");
  return f;
}

}  // namespace

MaterialLibrary parse_materials(const std::string& json_text) {
  const json doc = parse_json(json_text, "materials file");
  if (!doc.contains("materials") || !doc["materials"].is_array()) {
    throw ConfigError("materials file: expected a 'materials' array");
  }
  MaterialLibrary lib;
  for (const auto& m : doc["materials"]) {
    const auto name = field<std::string>(m, "name", "material");
    const std::string where = "material '" + name + "'";
    std::vector<DispersionParam> params;
    if (!m.contains("dispersion_params") || !m["dispersion_params"].is_object()) {
      throw ConfigError(where + ": 'dispersion_params' must be an object");
    }
    for (const auto& [key, value] : m["dispersion_params"].items()) {
      if (!value.is_number()) throw ConfigError(where + ": parameter '" + key + "' is not a number");
      params.push_back({key, value.get<double>()});
    }
    const auto range = field<std::vector<double>>(m, "valid_range_nm", where);
    if (range.size() != 2 || !(range[1] > range[0])) {
      throw ConfigError(where + ": valid_range_nm must be [lo, hi] with lo < hi");
    }
    try {
      lib.add(MaterialModel(name, field<double>(m, "al_fraction", where), std::move(params),
                            {range[0], range[1]}, m.value("d33_pm_per_V", 0.0)));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return lib;
}

MaterialLibrary load_materials(const fs::path& path) {
  try {
    return parse_materials(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

fs::path resolve_stack_path(const std::string& name_or_path) {
  const bool is_path = name_or_path.find('/') != std::string::npos ||
                       (name_or_path.size() > 5 &&
                        name_or_path.compare(name_or_path.size() - 5, 5, ".json") == 0);
  if (is_path) return fs::path(name_or_path);
  return default_data_dir() / "stacks" / (name_or_path + ".json");
}

Device parse_device(const std::string& json_text, const MaterialLibrary& materials) {
  const json doc = parse_json(json_text, "stack file");
  Device d;
  auto& s = d.stack;
  s.name = doc.value("name", std::string("unnamed"));
  const std::string where = "stack '" + s.name + "'";

  auto layer = [&](const json& j, const std::string& what) {
    Layer l;
    l.material = materials.get(field<std::string>(j, "material", where + " " + what));
    l.thickness_nm = field<double>(j, "thickness_nm", where + " " + what);
    return l;
  };
  s.core = layer(field<json>(doc, "core", where), "core");
  const auto bilayer = field<json>(doc, "bilayer", where);
  if (!bilayer.is_array() || bilayer.size() != 2) {
    throw ConfigError(where + ": 'bilayer' must list exactly two layers");
  }
  s.bilayer = {layer(bilayer[0], "bilayer[0]"), layer(bilayer[1], "bilayer[1]")};
  s.n_bilayers = field<int>(doc, "n_bilayers", where);
  s.exterior = materials.get(field<std::string>(doc, "exterior", where));
  s.symmetric = doc.value("symmetric", true);
  if (doc.contains("qpm_period_um") && !doc["qpm_period_um"].is_null()) {
    s.qpm_period_um = field<double>(doc, "qpm_period_um", where);
    d.nominal_qpm_period_um = s.qpm_period_um;
  }
  if (doc.contains("qpm_design_point_nm")) {
    const auto p = field<std::vector<double>>(doc, "qpm_design_point_nm", where);
    if (p.size() != 2) throw ConfigError(where + ": qpm_design_point_nm must be [lambda_p, lambda_s]");
    d.qpm_design_point = std::make_pair(p[0], p[1]);
  }
  s.validate();

  d.pol = parse_polarization(doc.value("polarization", std::string("TM")));
  if (doc.contains("modes")) {
    const auto& m = doc["modes"];
    if (m.contains("pump")) d.pump = parse_family(m["pump"], where + " pump");
    if (m.contains("signal")) d.signal = parse_family(m["signal"], where + " signal");
    if (m.contains("idler")) d.idler = parse_family(m["idler"], where + " idler");
  }
  return d;
}

Device load_device(const fs::path& path, const MaterialLibrary& materials) {
  try {
    return parse_device(read_file(path), materials);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void CsvWriter::comment(const std::string& key, const std::string& value) {
  out_ << "# " << key << " = " << value << '\n';
}

void CsvWriter::comment(const std::string& key, double value) { comment(key, format_number(value)); }

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ << ',';
    out_ << cells[k];
  }
  out_ << '\n';
}

}  // namespace brwspdc
