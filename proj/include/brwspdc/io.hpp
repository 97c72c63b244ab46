#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "brwspdc/phasematch.hpp"

namespace brwspdc {

// Directory with materials.json and stacks/, fixed at configure time.
std::filesystem::path default_data_dir();

// BRWSPDC_MATERIALS if set, else <data dir>/materials.json.
std::filesystem::path default_materials_path();

MaterialLibrary load_materials(const std::filesystem::path& path);
MaterialLibrary parse_materials(const std::string& json_text);

// A preset name ("brw-paper") resolves to <data dir>/stacks/<name>.json;
// anything containing a path separator or ending in .json is taken as a path.
std::filesystem::path resolve_stack_path(const std::string& name_or_path);

// Reads a stack file into a Device. The QPM period is left as written; call
// resolve_qpm_period to apply the design point.
Device load_device(const std::filesystem::path& path, const MaterialLibrary& materials);
Device parse_device(const std::string& json_text, const MaterialLibrary& materials);

/// Minimal CSV emitter: `# key = value` comment lines, one header line, then
/// rows. Numbers use %.12g so output is byte-stable for identical input.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(const std::string& key, const std::string& value);
  void comment(const std::string& key, double value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

std::string format_number(double x);

}  // namespace brwspdc
