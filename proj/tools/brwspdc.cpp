// brwspdc: command-line front end for the Bragg-waveguide SPDC toolkit.
//
// Subcommands write CSV datasets into --out-dir and print a short summary on
// stdout. Exit codes: 0 success, 2 usage, 3 configuration, 4 numerical.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "brwspdc/errors.hpp"
#include "brwspdc/io.hpp"
#include "brwspdc/spdc.hpp"

namespace fs = std::filesystem;
using namespace brwspdc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string materials;
  std::string stack = "brw-paper";
  std::string reference = "conventional-paper";
  std::string out_dir = ".";
  bool serial = false;
  std::optional<double> period_um;
  std::optional<std::string> pol;
};

struct GridArgs {
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::optional<std::string> list;  // explicit comma-separated grid
};

std::vector<double> make_grid(const GridArgs& g) {
  std::vector<double> out;
  if (g.list) {
    std::stringstream ss(*g.list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw UsageError("--grid: '" + item + "' is not a number");
      }
    }
    if (out.empty()) throw UsageError("--grid: empty grid");
    for (std::size_t k = 1; k < out.size(); ++k) {
      if (!(out[k] > out[k - 1])) throw UsageError("--grid: values must be strictly increasing");
    }
    return out;
  }
  if (!(g.step > 0.0)) throw UsageError("grid step must be positive");
  if (!(g.to >= g.from)) throw UsageError("grid range is inverted (--from > --to)");
  const auto n = static_cast<long>(std::floor((g.to - g.from) / g.step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(g.from + static_cast<double>(k) * g.step);
  return out;
}

void add_grid_options(CLI::App* cmd, GridArgs& g, double from, double to, double step,
                      const std::string& what) {
  g.from = from;
  g.to = to;
  g.step = step;
  cmd->add_option("--from", g.from, "First " + what + " wavelength, nm")->capture_default_str();
  cmd->add_option("--to", g.to, "Last " + what + " wavelength, nm")->capture_default_str();
  cmd->add_option("--step", g.step, "Grid step, nm")->capture_default_str();
  cmd->add_option("--grid", g.list, "Explicit comma-separated grid, nm (overrides --from/--to/--step)");
}

struct Loaded {
  Device device;
  std::string source;
};

class Session {
 public:
  explicit Session(const Globals& g) : g_(g) {
    materials_path_ = g.materials.empty() ? default_materials_path() : fs::path(g.materials);
    library_ = load_materials(materials_path_);
    fs::create_directories(g.out_dir);
  }

  Loaded device(const std::string& name) const {
    Loaded l;
    const auto path = resolve_stack_path(name);
    l.source = path.string();
    l.device = load_device(path, library_);
    if (g_.pol) l.device.pol = parse_polarization(*g_.pol);
    if (g_.period_um) {
      l.device.stack.qpm_period_um = *g_.period_um;
    } else {
      resolve_qpm_period(l.device);
    }
    return l;
  }

  Loaded primary() const { return device(g_.stack); }

  // Primary stack plus the comparison stack unless disabled.
  std::vector<Loaded> devices() const {
    std::vector<Loaded> out{device(g_.stack)};
    if (!g_.reference.empty() && g_.reference != "none" && g_.reference != g_.stack) {
      out.push_back(device(g_.reference));
    }
    return out;
  }

  Execution exec() const { return g_.serial ? Execution::serial : Execution::parallel; }

  fs::path out(const std::string& file) const { return fs::path(g_.out_dir) / file; }

  void echo(CsvWriter& w, const std::string& command, const Loaded& l) const {
    w.comment("command", command);
    w.comment("materials", materials_path_.string());
    w.comment("stack", l.device.stack.name);
    w.comment("stack_file", l.source);
    w.comment("polarization", to_string(l.device.pol));
    w.comment("pump_mode", to_string(l.device.pump));
    w.comment("signal_mode", to_string(l.device.signal));
    w.comment("idler_mode", to_string(l.device.idler));
    const auto& s = l.device.stack;
    w.comment("core_nm", s.core.thickness_nm);
    w.comment("bilayer_nm", format_number(s.bilayer[0].thickness_nm) + " " +
                                format_number(s.bilayer[1].thickness_nm));
    w.comment("n_bilayers", std::to_string(s.n_bilayers));
    if (l.device.nominal_qpm_period_um) {
      w.comment("qpm_period_nominal_um", *l.device.nominal_qpm_period_um);
    }
    if (s.qpm_period_um) w.comment("qpm_period_um", *s.qpm_period_um);
    if (g_.period_um) {
      w.comment("qpm_period_source", "command line");
    } else if (l.device.qpm_design_point) {
      w.comment("qpm_period_source",
                "phase matched at lambda_p = " + format_number(l.device.qpm_design_point->first) +
                    " nm, lambda_s = " + format_number(l.device.qpm_design_point->second) + " nm");
    }
  }

 private:
  Globals g_;
  fs::path materials_path_;
  MaterialLibrary library_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

void print(const std::string& key, const std::string& value) {
  std::cout << key << ": " << value << '\n';
}

std::string fwhm_text(const SpdcSpectrum& sp) {
  return sp.fwhm_nm ? format_number(*sp.fwhm_nm) + " nm" : "undefined (" + sp.fwhm_status + ")";
}

// ---------------------------------------------------------------------------

struct ModesArgs {
  double lambda_nm = 0.0;
  bool profiles = false;
};

void cmd_modes(const Session& s, const ModesArgs& a) {
  const auto l = s.primary();
  const auto& d = l.device;
  std::vector<ModeSolution> modes = find_tir_modes(d.stack, a.lambda_nm, d.pol, d.solver);
  std::string brw_note;
  try {
    modes.push_back(find_brw_mode(d.stack, a.lambda_nm, d.pol, d.idler.kind == ModeKind::BRW
                                                                     ? d.idler.parity
                                                                     : Parity::even,
                                  d.solver));
  } catch (const NotFoundError& e) {
    brw_note = e.what();
  }

  std::ostringstream csv;
  CsvWriter w(csv);
  s.echo(w, "modes", l);
  w.comment("lambda_nm", a.lambda_nm);
  if (!brw_note.empty()) w.comment("brw", brw_note);
  w.header({"lambda_nm", "pol", "kind", "n_eff", "beta_rad_per_um", "leakage_residual"});
  for (const auto& m : modes) {
    w.row({format_number(m.lambda_nm), to_string(m.pol), to_string(m.kind), format_number(m.n_eff),
           format_number(m.beta_rad_per_um), format_number(m.leakage_residual)});
  }
  open_out(s.out("modes_" + d.stack.name + ".csv")) << csv.str();
  std::cout << csv.str();

  if (a.profiles) {
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& m = modes[k];
      auto f = open_out(s.out("profile_" + d.stack.name + "_" + std::to_string(k) + "_" +
                              to_string(m.kind) + "_" + to_string(m.parity) + ".csv"));
      CsvWriter pw(f);
      s.echo(pw, "modes --profiles", l);
      pw.comment("lambda_nm", m.lambda_nm);
      pw.comment("n_eff", m.n_eff);
      pw.header({"x_nm", "E"});
      for (std::size_t i = 0; i < m.profile.size(); ++i) {
        pw.row({format_number(m.profile.x_nm[i]), format_number(m.profile.field[i])});
      }
    }
  }
}

struct Fig2Args {
  GridArgs grid;
  double lambda_s = 1550.0;
};

void cmd_fig2(const Session& s, const Fig2Args& a) {
  const auto grid = make_grid(a.grid);
  for (const auto& l : s.devices()) {
    const auto c = pump_idler_mismatch_curve(l.device, grid, a.lambda_s, s.exec());
    auto f = open_out(s.out("fig2_" + l.device.stack.name + ".csv"));
    CsvWriter w(f);
    s.echo(w, "fig2", l);
    w.comment("lambda_s_nm", a.lambda_s);
    w.comment("derivative", "central difference, step = grid step; rad/um per nm");
    w.header({"lambda_p_nm", "beta_diff_rad_per_um", "dbeta_dlambda"});
    for (std::size_t k = 0; k < grid.size(); ++k) {
      w.row({format_number(grid[k]), format_number(c.beta_diff[k]), format_number(c.derivative[k])});
    }
    print(l.device.stack.name + " derivative zero crossing",
          c.zero_crossing_nm ? format_number(*c.zero_crossing_nm) + " nm" : "none in window");
  }
}

struct SweepArgs {
  GridArgs grid;
  double pivot = 0.0;
  double length_mm = 15.0;
  double power = 1.0;
};

SpdcConfig spdc_config(const Session& s, const SweepArgs& a) {
  if (!(a.length_mm > 0.0)) throw UsageError("--length-mm must be positive");
  if (!(a.power > 0.0)) throw UsageError("--power must be positive");
  SpdcConfig c;
  c.length_mm = a.length_mm;
  c.pump_power_mw_per_um = a.power;
  c.exec = s.exec();
  return c;
}

void write_spectrum(const Session& s, const Loaded& l, const std::string& command,
                    const std::string& file, const SpdcSpectrum& sp, const SpdcConfig& c,
                    const std::string& column) {
  auto f = open_out(s.out(file));
  CsvWriter w(f);
  s.echo(w, command, l);
  w.comment("length_mm", c.length_mm);
  w.comment("pump_power_mW_per_um", c.pump_power_mw_per_um);
  w.comment(sp.swept == "lambda_p" ? "lambda_s_nm" : "lambda_p_nm", sp.pivot_nm);
  w.comment("overlap", c.core_only_overlap ? "poled core" : "whole stack");
  w.comment("peak_W_per_nm", sp.peak);
  w.comment("peak_at_nm", sp.peak_at_nm);
  w.comment("fwhm_nm", sp.fwhm_nm ? format_number(*sp.fwhm_nm) : sp.fwhm_status);
  for (std::size_t k = 0; k < sp.grid_nm.size(); ++k) {
    if (!sp.gap_reasons[k].empty()) {
      w.comment("gap at " + format_number(sp.grid_nm[k]) + " nm", sp.gap_reasons[k]);
    }
  }
  w.header({column, "dPs_dlambda_W_per_nm_per_um"});
  for (std::size_t k = 0; k < sp.grid_nm.size(); ++k) {
    w.row({format_number(sp.grid_nm[k]), format_number(sp.density[k])});
  }
}

void report_pair(const std::vector<std::pair<std::string, SpdcSpectrum>>& spectra) {
  for (const auto& [name, sp] : spectra) {
    print(name + " FWHM", fwhm_text(sp));
    print(name + " peak", format_number(sp.peak) + " W/nm at " + format_number(sp.peak_at_nm) + " nm");
  }
  if (spectra.size() == 2 && spectra[0].second.fwhm_nm && spectra[1].second.fwhm_nm) {
    print("FWHM ratio " + spectra[0].first + "/" + spectra[1].first,
          format_number(*spectra[0].second.fwhm_nm / *spectra[1].second.fwhm_nm));
  }
}

void cmd_fig3(const Session& s, const SweepArgs& a) {
  const auto grid = make_grid(a.grid);
  const auto c = spdc_config(s, a);
  std::vector<std::pair<std::string, SpdcSpectrum>> out;
  for (const auto& l : s.devices()) {
    auto sp = pump_sweep(l.device, c, a.pivot, grid);
    write_spectrum(s, l, "fig3", "fig3_" + l.device.stack.name + ".csv", sp, c, "lambda_p_nm");
    out.emplace_back(l.device.stack.name, std::move(sp));
  }
  report_pair(out);
}

void cmd_fig5(const Session& s, const SweepArgs& a) {
  const auto grid = make_grid(a.grid);
  const auto c = spdc_config(s, a);
  std::vector<std::pair<std::string, SpdcSpectrum>> out;
  for (const auto& l : s.devices()) {
    auto sp = signal_sweep(l.device, c, a.pivot, grid);
    write_spectrum(s, l, "fig5", "fig5_" + l.device.stack.name + ".csv", sp, c, "lambda_s_nm");
    out.emplace_back(l.device.stack.name, std::move(sp));
  }
  report_pair(out);
}

void cmd_fig4(const Session& s, const GridArgs& g) {
  const auto grid = make_grid(g);
  const auto l = s.primary();
  TuningOptions opts;
  opts.exec = s.exec();
  const auto t = tuning_curve(l.device, l.device.period_um(), grid, opts);
  auto f = open_out(s.out("fig4_" + l.device.stack.name + ".csv"));
  CsvWriter w(f);
  s.echo(w, "fig4", l);
  for (std::size_t k = 0; k < t.gaps_nm.size(); ++k) {
    w.comment("gap at " + format_number(t.gaps_nm[k]) + " nm", t.gap_reasons[k]);
  }
  w.header({"lambda_p_nm", "lambda_s_nm", "lambda_i_nm"});
  for (const auto& p : t.points) {
    w.row({format_number(p.lambda_p_nm), format_number(p.lambda_s_nm), format_number(p.lambda_i_nm)});
  }
  if (t.points.empty()) throw NotFoundError("fig4: no phase-matched point on the grid");
  double lo = t.points.front().lambda_s_nm, hi = lo;
  bool rising = true;
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    lo = std::min(lo, t.points[k].lambda_s_nm);
    hi = std::max(hi, t.points[k].lambda_s_nm);
    if (k > 0 && !(t.points[k].lambda_i_nm > t.points[k - 1].lambda_i_nm)) rising = false;
  }
  print("signal excursion", format_number(hi - lo) + " nm");
  print("idler strictly increasing", rising ? "yes" : "no");
  print("gaps", std::to_string(t.gaps_nm.size()));
}

struct DesignArgs {
  double lambda_p = 800.0;
  double lambda_s = 1550.0;
  double dc_from = 450.0;
  double dc_to = 700.0;
  bool fixed_cladding = false;
};

void cmd_design(const Session& s, const DesignArgs& a) {
  if (!(a.dc_from < a.dc_to)) throw UsageError("--dc-from must be below --dc-to");
  const auto l = s.primary();
  CoreSearchOptions opts;
  opts.co_design_cladding = !a.fixed_cladding;
  const auto r = core_thickness_search(l.device, a.lambda_p, a.lambda_s, a.dc_from, a.dc_to, opts);
  auto designed = r.device;
  designed.stack.qpm_period_um.reset();
  const auto q = qpm_period(designed, a.lambda_p, a.lambda_s);
  const double li = idler_wavelength(a.lambda_p, a.lambda_s);
  const auto fp = quarter_wave_fixed_point(r.device.stack, li, designed.pol, designed.idler.parity,
                                           designed.solver);

  print("core thickness d_c", format_number(r.d_c_nm) + " nm");
  print("cladding d1", format_number(designed.stack.bilayer[0].thickness_nm) + " nm");
  print("cladding d2", format_number(designed.stack.bilayer[1].thickness_nm) + " nm");
  print("QPM period", format_number(q.period_um) + " um");
  print("n_eff pump", format_number(q.n_p));
  print("n_eff signal", format_number(q.n_s));
  print("n_eff idler", format_number(q.n_i));
  std::cout << "quarter-wave fixed point trace (n_eff, d1, d2):\n";
  for (const auto& step : fp.trace) {
    std::cout << "  " << format_number(step.n_eff) << ' ' << format_number(step.d1_nm) << ' '
              << format_number(step.d2_nm) << '\n';
  }
  std::cout << "core search trace (d_c, d1, d2, slope):\n";
  for (const auto& t : r.trace) {
    std::cout << "  " << format_number(t.d_c_nm) << ' ' << format_number(t.d1_nm) << ' '
              << format_number(t.d2_nm) << ' ' << format_number(t.slope) << '\n';
  }

  // Stack file for the designed device, usable as --stack.
  const auto src = nlohmann::json::parse(std::ifstream(l.source));
  auto doc = src;
  doc["name"] = designed.stack.name + "-designed";
  doc["core"]["thickness_nm"] = r.d_c_nm;
  doc["bilayer"][0]["thickness_nm"] = designed.stack.bilayer[0].thickness_nm;
  doc["bilayer"][1]["thickness_nm"] = designed.stack.bilayer[1].thickness_nm;
  doc["qpm_period_um"] = q.period_um;
  doc["qpm_design_point_nm"] = {a.lambda_p, a.lambda_s};
  const auto path = s.out("design_" + designed.stack.name + ".json");
  open_out(path) << doc.dump(2) << '\n';
  print("stack written", path.string());
}

struct FluxArgs {
  double lambda_p = 800.0;
  double center = 1550.0;
  double window = 1.0;
  double step = 0.01;
  double length_mm = 15.0;
  double power = 1.0;
};

void cmd_flux(const Session& s, const FluxArgs& a) {
  if (!(a.window > 0.0)) throw UsageError("--window must be positive");
  if (!(a.step > 0.0)) throw UsageError("--step must be positive");
  SweepArgs sa;
  sa.length_mm = a.length_mm;
  sa.power = a.power;
  const auto c = spdc_config(s, sa);
  GridArgs g;
  g.from = a.center - 0.5 * a.window;
  g.to = a.center + 0.5 * a.window;
  g.step = a.window / std::max(1.0, std::round(a.window / a.step));
  const auto grid = make_grid(g);

  auto f = open_out(s.out("flux.csv"));
  CsvWriter w(f);
  w.comment("command", "flux");
  w.comment("lambda_p_nm", a.lambda_p);
  w.comment("window_center_nm", a.center);
  w.comment("window_width_nm", a.window);
  w.comment("length_mm", a.length_mm);
  w.comment("pump_power_mW_per_um", a.power);
  w.header({"stack", "pairs_per_s", "peak_W_per_nm", "period_um"});
  for (const auto& l : s.devices()) {
    const auto sp = signal_sweep(l.device, c, a.lambda_p, grid);
    const double flux = pair_flux(sp, a.center, a.window);
    w.row({l.device.stack.name, format_number(flux), format_number(sp.peak),
           format_number(l.device.period_um())});
    print(l.device.stack.name + " pair flux", format_number(flux) + " pairs/s");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair generation in planar Bragg reflection waveguides"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--materials", g.materials, "Materials file (default: data dir)")
      ->envname("BRWSPDC_MATERIALS");
  app.add_option("--stack", g.stack, "Stack preset name or stack file")->capture_default_str();
  app.add_option("--reference", g.reference,
                 "Comparison stack for fig2/fig3/fig5/flux ('none' to skip)")
      ->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for CSV output")->capture_default_str();
  app.add_option("--period-um", g.period_um, "Grating period override, um");
  app.add_option("--pol", g.pol, "Polarization override (te|tm)");
  app.add_flag("--serial", g.serial, "Run sweeps on one thread (reference path)");

  ModesArgs modes;
  auto* c_modes = app.add_subcommand("modes", "List TIR modes and the Bragg mode at one wavelength");
  c_modes->add_option("--lambda", modes.lambda_nm, "Wavelength, nm")->required();
  c_modes->add_flag("--profiles", modes.profiles, "Also write x_nm,E profile files");

  Fig2Args fig2;
  auto* c_fig2 = app.add_subcommand("fig2", "beta_p - beta_i and its slope versus pump wavelength");
  add_grid_options(c_fig2, fig2.grid, 790.0, 810.0, 0.5, "pump");
  c_fig2->add_option("--lambda-s", fig2.lambda_s, "Signal wavelength, nm")->capture_default_str();

  SweepArgs fig3;
  fig3.pivot = 1550.0;
  auto* c_fig3 = app.add_subcommand("fig3", "Signal spectral density versus pump wavelength");
  add_grid_options(c_fig3, fig3.grid, 788.0, 812.0, 0.1, "pump");
  c_fig3->add_option("--lambda-s", fig3.pivot, "Signal wavelength, nm")->capture_default_str();
  c_fig3->add_option("--length-mm", fig3.length_mm, "Interaction length, mm")->capture_default_str();
  c_fig3->add_option("--power", fig3.power, "Pump power, mW/um")->capture_default_str();

  GridArgs fig4;
  auto* c_fig4 = app.add_subcommand("fig4", "Phase-matched signal and idler versus pump wavelength");
  add_grid_options(c_fig4, fig4, 793.0, 806.0, 0.5, "pump");

  SweepArgs fig5;
  fig5.pivot = 800.0;
  auto* c_fig5 = app.add_subcommand("fig5", "Signal spectral density versus signal wavelength");
  add_grid_options(c_fig5, fig5.grid, 1510.0, 1590.0, 0.1, "signal");
  c_fig5->add_option("--lambda-p", fig5.pivot, "Pump wavelength, nm")->capture_default_str();
  c_fig5->add_option("--length-mm", fig5.length_mm, "Interaction length, mm")->capture_default_str();
  c_fig5->add_option("--power", fig5.power, "Pump power, mW/um")->capture_default_str();

  DesignArgs design;
  auto* c_design = app.add_subcommand("design", "Core thickness search with quarter-wave cladding");
  c_design->add_option("--lambda-p", design.lambda_p, "Pump wavelength, nm")->capture_default_str();
  c_design->add_option("--lambda-s", design.lambda_s, "Signal wavelength, nm")->capture_default_str();
  c_design->add_option("--dc-from", design.dc_from, "Search range start, nm")->capture_default_str();
  c_design->add_option("--dc-to", design.dc_to, "Search range end, nm")->capture_default_str();
  c_design->add_flag("--fixed-cladding", design.fixed_cladding,
                     "Keep the stack's cladding instead of re-deriving it at each d_c");

  FluxArgs flux;
  auto* c_flux = app.add_subcommand("flux", "Pair flux in a detection window");
  c_flux->add_option("--lambda-p", flux.lambda_p, "Pump wavelength, nm")->capture_default_str();
  c_flux->add_option("--center", flux.center, "Window center, nm")->capture_default_str();
  c_flux->add_option("--window", flux.window, "Window width, nm")->capture_default_str();
  c_flux->add_option("--step", flux.step, "Signal grid step, nm")->capture_default_str();
  c_flux->add_option("--length-mm", flux.length_mm, "Interaction length, mm")->capture_default_str();
  c_flux->add_option("--power", flux.power, "Pump power, mW/um")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const Session session(g);
    if (c_modes->parsed()) cmd_modes(session, modes);
    if (c_fig2->parsed()) cmd_fig2(session, fig2);
    if (c_fig3->parsed()) cmd_fig3(session, fig3);
    if (c_fig4->parsed()) cmd_fig4(session, fig4);
    if (c_fig5->parsed()) cmd_fig5(session, fig5);
    if (c_design->parsed()) cmd_design(session, design);
    if (c_flux->parsed()) cmd_flux(session, flux);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
