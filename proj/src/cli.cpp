#include "rydoa/cli.hpp"

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "rydoa/config.hpp"
#include "rydoa/scenario.hpp"

namespace rydoa::cli {

namespace {

using nlohmann::ordered_json;

struct Common {
  std::string preset;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_path;
  int jobs = 0;
  std::uint64_t seed = 1;
};

struct Resolved {
  config::ScenarioConfig cfg;
  scenario::Provenance provenance;
};

std::string fmt_override(double v) { return scenario::fmt(v); }

Resolved resolve(const Common& c, const std::string& command, std::vector<std::string> extra_sets) {
  config::FlatConfig flat;
  std::string preset_name = c.preset;
  if (!c.config_path.empty()) {
    if (!c.preset.empty()) fail(ErrorKind::config, "--preset and --config are mutually exclusive");
    flat = config::load_flat(c.config_path);
    preset_name = c.config_path;
  } else {
    if (preset_name.empty()) preset_name = "fig3";
    flat = config::preset(preset_name);
  }
  std::vector<std::string> all = c.sets;
  all.insert(all.end(), extra_sets.begin(), extra_sets.end());
  std::vector<std::pair<std::string, nlohmann::json>> overrides;
  for (const auto& s : all) overrides.push_back(config::parse_override(s));
  Resolved r{config::build(config::apply_overrides(std::move(flat), overrides)),
             {command, preset_name, all, c.seed}};
  return r;
}

// Output sink: the named file, or the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) fail(ErrorKind::config, "cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : fallback_; }

 private:
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::config, "cannot open output file " + path);
  f << text;
}

std::string gnuplot_stub(const std::string& data, const std::string& xcol, const std::string& ycols,
                         bool logx, bool logy) {
  std::ostringstream g;
  g << "# gnuplot -p " << data << ".gp\n";
  g << "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n";
  if (logx) g << "set logscale x\n";
  if (logy) g << "set logscale y\n";
  g << "plot for [c in '" << ycols << "'] '" << data << "' using '" << xcol << "':c with lines title c\n";
  return g.str();
}

spectroscopy::TransitionKind parse_transition(const std::string& s) {
  if (s == "e1") return spectroscopy::TransitionKind::E1;
  if (s == "m1") return spectroscopy::TransitionKind::M1;
  fail(ErrorKind::config, "--transition: expected e1 or m1");
}

spectroscopy::ResponseModel parse_model(const std::string& s) {
  if (s == "analytic") return spectroscopy::ResponseModel::analytic;
  if (s == "full") return spectroscopy::ResponseModel::full;
  fail(ErrorKind::config, "--model: expected analytic or full");
}

int cmd_spectrum(const Common& c, const std::string& transition, const std::string& model,
                 const std::vector<std::string>& sugar, std::ostream& out, std::ostream& err) {
  const auto kind = parse_transition(transition);
  const auto resp = parse_model(model);
  auto r = resolve(c, "spectrum --transition " + transition + " --model " + model, sugar);
  const auto spec = scenario::run_spectrum(r.cfg, kind, resp);
  for (const auto& w : spec.warnings) err << "warning: " << w << "\n";

  Sink sink(c.out_path, out);
  scenario::write_header(sink.stream(), r.provenance);
  scenario::write_spectrum_csv(sink.stream(), spec);
  if (!c.out_path.empty()) {
    std::ostringstream peaks;
    scenario::write_header(peaks, r.provenance);
    scenario::write_peaks_csv(peaks, spec);
    write_text(c.out_path + ".peaks.csv", peaks.str());
    write_text(c.out_path + ".gp", gnuplot_stub(c.out_path, "delta_c_mhz", "im_rho21", false, false));
  }
  return exit_ok;
}

int cmd_qcrb(const Common& c, const std::string& var, const std::string& range, bool log,
             const std::string& var2, const std::string& range2, bool log2, std::ostream& out) {
  scenario::SweepSpec spec;
  spec.primary = scenario::parse_axis(scenario::parse_variable(var), range, log);
  std::string command = "qcrb-sweep --var " + var + " --range " + range + (log ? " --log" : "");
  if (!var2.empty() || !range2.empty()) {
    if (var2.empty() || range2.empty()) fail(ErrorKind::config, "--var2 and --range2 go together");
    spec.secondary = scenario::parse_axis(scenario::parse_variable(var2), range2, log2);
    command += " --var2 " + var2 + " --range2 " + range2 + (log2 ? " --log2" : "");
  }
  auto r = resolve(c, command, {});
  const auto rows = scenario::qcrb_sweep(r.cfg, spec);
  Sink sink(c.out_path, out);
  scenario::write_header(sink.stream(), r.provenance);
  scenario::write_qcrb_csv(sink.stream(), spec, rows);
  if (!c.out_path.empty())
    write_text(c.out_path + ".gp", gnuplot_stub(c.out_path, scenario::column_name(spec.primary.variable),
                                                "resolution_theta_rf_deg resolution_theta_b_deg", log, true));
  return exit_ok;
}

int cmd_compare(const Common& c, const std::string& var, const std::string& range, bool log, std::ostream& out) {
  const auto axis = scenario::parse_axis(scenario::parse_variable(var), range, log);
  auto r = resolve(c, "compare --var " + var + " --range " + range + (log ? " --log" : ""), {});
  const auto result = scenario::compare_sweep(r.cfg, axis);
  Sink sink(c.out_path, out);
  scenario::write_header(sink.stream(), r.provenance);
  scenario::write_compare_csv(sink.stream(), axis, result);
  if (!c.out_path.empty())
    write_text(c.out_path + ".gp", gnuplot_stub(c.out_path, scenario::column_name(axis.variable),
                                                "rydberg_lo_free_deg rydberg_lo_dressed_deg ula_deg vsa_deg", log,
                                                true));
  return exit_ok;
}

ordered_json provenance_json(const scenario::Provenance& p) {
  return {{"version", scenario::version},
          {"command", p.command},
          {"preset", p.preset},
          {"overrides", p.overrides},
          {"seed", p.seed.value_or(0)}};
}

int cmd_doa(const Common& c, std::optional<int> trials, std::ostream& out) {
  std::vector<std::string> extra;
  if (trials) extra.push_back("monte_carlo.trials=" + std::to_string(*trials));
  const auto r = resolve(c, "doa", extra);
  ordered_json doc;
  doc["provenance"] = provenance_json(r.provenance);
  int code = exit_ok;
  try {
    const auto result = scenario::run_doa(r.cfg, c.seed);
    for (const auto& [k, v] : result.items()) doc[k] = v;
  } catch (const Error& e) {
    doc["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    code = e.kind() == ErrorKind::config ? exit_config : exit_computation;
  }
  Sink sink(c.out_path, out);
  sink.stream() << doc.dump(2) << "\n";
  return code;
}

int cmd_config(const Common& c, std::ostream& out) {
  const auto r = resolve(c, "config", {});
  Sink sink(c.out_path, out);
  sink.stream() << config::serialize(r.cfg).dump(2) << "\n";
  return exit_ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-cell Rydberg direction-of-arrival toolkit", "rydoa"};
  app.set_version_flag("--version", std::string(scenario::version));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", common.preset, "compiled or search-path preset (default fig3)");
    sub->add_option("--config", common.config_path, "scenario JSON file");
    sub->add_option("--set", common.sets, "override key=value (repeatable)");
    sub->add_option("--out", common.out_path, "output file (default stdout)");
    sub->add_option("--jobs", common.jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", common.seed, "noise seed");
  };

  std::string transition = "e1", model = "analytic";
  std::optional<double> theta_rf, b_bias, theta_bias, e0;
  auto* spectrum = app.add_subcommand("spectrum", "EIT spectrum CSV with peak sidecar");
  add_common(spectrum);
  spectrum->add_option("--transition", transition, "e1 or m1");
  spectrum->add_option("--model", model, "analytic or full");
  spectrum->add_option("--theta-rf", theta_rf, "polarization angle, deg");
  spectrum->add_option("--b-bias", b_bias, "bias magnitude, mT");
  spectrum->add_option("--theta-bias", theta_bias, "bias tilt, deg");
  spectrum->add_option("--e0", e0, "field amplitude, V/m");

  std::string var, range, var2, range2;
  bool log = false, log2 = false;
  auto* qcrb = app.add_subcommand("qcrb-sweep", "quantum Cramer-Rao bound sweep");
  add_common(qcrb);
  qcrb->add_option("--var", var, "swept variable")->required();
  qcrb->add_option("--range", range, "start:stop:steps")->required();
  qcrb->add_flag("--log", log, "log spacing");
  qcrb->add_option("--var2", var2, "second swept variable");
  qcrb->add_option("--range2", range2, "start:stop:steps");
  qcrb->add_flag("--log2", log2, "log spacing for the second axis");

  auto* compare = app.add_subcommand("compare", "single cell against classical arrays");
  add_common(compare);
  compare->add_option("--var", var, "snr, n_elements, distance or n_atoms")->required();
  compare->add_option("--range", range, "start:stop:steps")->required();
  compare->add_flag("--log", log, "log spacing");

  std::optional<int> trials;
  auto* doa = app.add_subcommand("doa", "end-to-end reconstruction, JSON");
  add_common(doa);
  doa->add_option("--trials", trials, "Monte Carlo trials (0 disables)")->check(CLI::NonNegativeNumber);

  auto* cfg_cmd = app.add_subcommand("config", "print the resolved scenario as JSON");
  add_common(cfg_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << scenario::version << "\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }

  if (common.jobs > 0) omp_set_num_threads(common.jobs);

  try {
    if (*spectrum) {
      std::vector<std::string> sugar;
      if (theta_rf) sugar.push_back("scene.theta_rf_deg=" + fmt_override(*theta_rf));
      if (b_bias) sugar.push_back("bias.magnitude_mt=" + fmt_override(*b_bias));
      if (theta_bias) sugar.push_back("bias.theta_bias_deg=" + fmt_override(*theta_bias));
      if (e0) sugar.push_back("scene.e0_v_per_m=" + fmt_override(*e0));
      return cmd_spectrum(common, transition, model, sugar, out, err);
    }
    if (*qcrb) return cmd_qcrb(common, var, range, log, var2, range2, log2, out);
    if (*compare) return cmd_compare(common, var, range, log, out);
    if (*doa) return cmd_doa(common, trials, out);
    if (*cfg_cmd) return cmd_config(common, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? exit_config : exit_computation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_computation;
  }
  return exit_config;
}

}  // namespace rydoa::cli
