#include "rydoa/scenario.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>


#include "rydoa/constants.hpp"

namespace rydoa::scenario {

namespace c = rydoa::constants;
using config::ScenarioConfig;
using nlohmann::ordered_json;

const char* to_string(Variable v) {
  switch (v) {
    case Variable::theta_rf: return "theta_rf";
    case Variable::theta_bias: return "theta_bias";
    case Variable::e0: return "e0";
    case Variable::b_bias: return "b_bias";
    case Variable::snr: return "snr";
    case Variable::n_elements: return "n_elements";
    case Variable::distance: return "distance";
    case Variable::n_atoms: return "n_atoms";
  }
  return "unknown";
}

Variable parse_variable(const std::string& name) {
  for (auto v : {Variable::theta_rf, Variable::theta_bias, Variable::e0, Variable::b_bias, Variable::snr,
                 Variable::n_elements, Variable::distance, Variable::n_atoms})
    if (name == to_string(v)) return v;
  fail(ErrorKind::config, "unknown sweep variable '" + name + "'");
}

std::string column_name(Variable v) {
  switch (v) {
    case Variable::theta_rf: return "theta_rf_deg";
    case Variable::theta_bias: return "theta_bias_deg";
    case Variable::e0: return "e0_v_per_m";
    case Variable::b_bias: return "b_bias_mt";
    case Variable::snr: return "snr";
    case Variable::n_elements: return "n_elements";
    case Variable::distance: return "distance_m";
    case Variable::n_atoms: return "n_atoms";
  }
  return "x";
}

void SweepAxis::validate() const {
  const std::string name = to_string(variable);
  if (steps < 2) fail(ErrorKind::config, "sweep " + name + ": steps must be >= 2");
  if (!std::isfinite(start) || !std::isfinite(stop)) fail(ErrorKind::config, "sweep " + name + ": non-finite range");
  if (start == stop) fail(ErrorKind::config, "sweep " + name + ": start and stop must differ");
  if (log && !(start > 0.0 && stop > 0.0))
    fail(ErrorKind::config, "sweep " + name + ": log spacing needs positive endpoints");
}

std::vector<double> SweepAxis::values() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    out[static_cast<std::size_t>(i)] =
        log ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start))) : start + t * (stop - start);
  }
  out.back() = stop;
  if (variable == Variable::n_elements)
    for (auto& x : out) x = std::round(x);
  return out;
}

SweepAxis parse_axis(Variable v, const std::string& range, bool log) {
  const auto a = range.find(':');
  const auto b = a == std::string::npos ? a : range.find(':', a + 1);
  if (b == std::string::npos) fail(ErrorKind::config, "sweep range '" + range + "' is not start:stop:steps");
  SweepAxis axis;
  axis.variable = v;
  axis.log = log;
  try {
    std::size_t used = 0;
    axis.start = std::stod(range.substr(0, a));
    axis.stop = std::stod(range.substr(a + 1, b - a - 1));
    const std::string steps = range.substr(b + 1);
    axis.steps = std::stoi(steps, &used);
    if (used != steps.size()) throw std::invalid_argument("steps");
  } catch (const std::logic_error&) {
    fail(ErrorKind::config, "sweep range '" + range + "' is not start:stop:steps");
  }
  axis.validate();
  return axis;
}

ScenarioConfig with_value(ScenarioConfig cfg, Variable v, double value) {
  switch (v) {
    case Variable::theta_rf: cfg.scene.theta_rf = value * c::deg; break;
    case Variable::theta_bias: cfg.bias.theta_bias = value * c::deg; break;
    case Variable::e0: cfg.scene.e_amplitude = value; break;
    case Variable::b_bias: cfg.bias.magnitude = value * 1e-3; break;
    case Variable::snr: cfg.compare.snr = value; break;
    case Variable::n_elements: cfg.compare.n_elements = static_cast<int>(std::lround(value)); break;
    case Variable::distance:
      cfg.link.distance = value;
      cfg.scene.e_amplitude = fields::field_at_receiver(cfg.link);
      break;
    case Variable::n_atoms:
      cfg.receiver.atom_density = value / std::pow(cfg.receiver.cell_length, 3);
      break;
  }
  cfg.validate();
  return cfg;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_header(std::ostream& out, const Provenance& p) {
  out << "# rydoa " << version << "\n";
  out << "# command: " << p.command << "\n";
  out << "# preset: " << (p.preset.empty() ? "(none)" : p.preset) << "\n";
  out << "# overrides:";
  if (p.overrides.empty()) out << " (none)";
  for (const auto& o : p.overrides) out << " " << o;
  out << "\n";
  if (p.seed) out << "# seed: " << *p.seed << "\n";
}

// ---------------------------------------------------------------------------

spectroscopy::EitSpectrum run_spectrum(const ScenarioConfig& cfg, spectroscopy::TransitionKind kind,
                                       spectroscopy::ResponseModel model, spectroscopy::Exec exec) {
  using namespace spectroscopy;
  const auto scene = cfg.resolved_scene();
  const LadderConfig& lad = kind == TransitionKind::E1 ? cfg.e1 : cfg.m1;
  const auto decomp = kind == TransitionKind::E1 ? fields::decompose_e_field(scene.theta_rf, scene.e_amplitude)
                                                 : fields::decompose_b_field(scene.theta_b, scene.b_amplitude);
  auto paths = enumerate_paths(lad, decomp, cfg.bias, PathOptions{.include_dark = true});
  auto grid = cfg.grid.values();
  if (kind == TransitionKind::M1) {
    std::vector<double> poles;
    for (const auto& p : paths) poles.push_back(pole_position(lad, p));
    grid = refine_around(grid, poles, 5.0 * lad.gamma_rf, 41);
  }
  auto response = sweep_response(lad, paths, grid, model, exec);
  return analyze_spectrum(lad, std::move(paths), std::move(grid), std::move(response));
}

void write_spectrum_csv(std::ostream& out, const spectroscopy::EitSpectrum& spec) {
  out << "delta_c_mhz,im_rho21\n";
  for (std::size_t i = 0; i < spec.detuning_grid.size(); ++i)
    out << fmt(spec.detuning_grid[i] / c::mhz) << "," << fmt(spec.response[i]) << "\n";
}

void write_peaks_csv(std::ostream& out, const spectroscopy::EitSpectrum& spec) {
  out << "center_mhz,height,prominence,fwhm_mhz,area,strength,path,q,unresolved\n";
  for (const auto& p : spec.peaks) {
    out << fmt(p.center / c::mhz) << "," << fmt(p.height) << "," << fmt(p.prominence) << "," << fmt(p.fwhm / c::mhz)
        << "," << fmt(p.area / c::mhz) << "," << fmt(p.strength) << ",";
    if (p.path)
      out << spec.paths[*p.path].label() << "," << spec.paths[*p.path].q;
    else
      out << ",";
    out << "," << (p.unresolved ? 1 : 0) << "\n";
  }
}

// ---------------------------------------------------------------------------

namespace {

estimation::FisherResult failed_fisher() {
  estimation::FisherResult f;
  f.qcrb(0, 0) = f.qcrb(1, 1) = estimation::diverged_value;
  f.diverged = {true, true};
  f.resolution_deg = {estimation::diverged_value, estimation::diverged_value};
  f.theta_doa_var = estimation::diverged_value;
  return f;
}

void check_qcrb_variable(Variable v) {
  if (v == Variable::snr || v == Variable::n_elements)
    fail(ErrorKind::config, std::string("qcrb-sweep: variable ") + to_string(v) + " does not enter the quantum bound");
}

template <class Body>
void for_each_index(std::size_t n, Exec exec, Body body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(rydoa_scenario_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<QcrbRow> qcrb_sweep(const ScenarioConfig& cfg, const SweepSpec& spec, Exec exec) {
  check_qcrb_variable(spec.primary.variable);
  if (spec.secondary) check_qcrb_variable(spec.secondary->variable);
  const auto xs = spec.primary.values();
  const std::vector<double> ys = spec.secondary ? spec.secondary->values() : std::vector<double>{0.0};

  std::vector<QcrbRow> rows(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) {
      auto& row = rows[i * ys.size() + j];
      row.x = {xs[i]};
      if (spec.secondary) row.x.push_back(ys[j]);
    }

  for_each_index(rows.size(), exec, [&](std::size_t k) {
    auto& row = rows[k];
    try {
      ScenarioConfig point = with_value(cfg, spec.primary.variable, row.x[0]);
      if (spec.secondary) point = with_value(point, spec.secondary->variable, row.x[1]);
      row.fisher = estimation::qcrb(point.resolved_scene(), point.bias, point.cycle_configs(), point.nu,
                                    point.fisher_options());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) throw;
      row.fisher = failed_fisher();
      row.status = rydoa::to_string(e.kind());
    }
  });
  return rows;
}

void write_qcrb_csv(std::ostream& out, const SweepSpec& spec, const std::vector<QcrbRow>& rows) {
  out << column_name(spec.primary.variable);
  if (spec.secondary) out << "," << column_name(spec.secondary->variable);
  out << ",qcrb_theta_rf_rad2,resolution_theta_rf_deg,qcrb_theta_b_rad2,resolution_theta_b_deg"
         ",doa_var_rad2,doa_resolution_deg,diverged_theta_rf,diverged_theta_b"
         ",a_norm_sq_theta_rf,a_norm_sq_theta_b,richardson_theta_rf,richardson_theta_b,status\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.x.size(); ++i) out << (i ? "," : "") << fmt(r.x[i]);
    const auto& f = r.fisher;
    const double doa_res = std::sqrt(f.theta_doa_var) / c::deg;
    out << "," << fmt(f.qcrb(0, 0)) << "," << fmt(f.resolution_deg[0]) << "," << fmt(f.qcrb(1, 1)) << ","
        << fmt(f.resolution_deg[1]) << "," << fmt(f.theta_doa_var) << "," << fmt(doa_res) << ","
        << (f.diverged[0] ? 1 : 0) << "," << (f.diverged[1] ? 1 : 0) << "," << fmt(f.a_norm_sq[0]) << ","
        << fmt(f.a_norm_sq[1]) << "," << fmt(f.consistency[0]) << "," << fmt(f.consistency[1]) << "," << r.status
        << "\n";
  }
}

// ---------------------------------------------------------------------------

CompareResult compare_sweep(const ScenarioConfig& cfg, const SweepAxis& axis) {
  if (axis.variable != Variable::snr && axis.variable != Variable::n_elements && axis.variable != Variable::distance &&
      axis.variable != Variable::n_atoms)
    fail(ErrorKind::config, std::string("compare: cannot sweep ") + to_string(axis.variable));
  CompareResult out;
  const auto scene = cfg.resolved_scene();
  out.fisher = estimation::qcrb(scene, cfg.bias, cfg.cycle_configs(), cfg.nu, cfg.fisher_options());

  const double wavelength = cfg.rf_wavelength();
  const double noise = cfg.thermal_noise_power();
  const double element_aperture = wavelength * wavelength * cfg.compare.element_gain / (4.0 * c::pi);

  for (const double x : axis.values()) {
    const ScenarioConfig point = with_value(cfg, axis.variable, x);
    CompareRow row;
    row.x = x;
    row.snr_array = row.snr_rydberg = point.compare.snr;
    if (axis.variable == Variable::distance) {
      const double a_eff = fields::effective_aperture(point.receiver.n_atoms(), point.e1.reduced_element,
                                                      point.e1.omega_rf(), point.receiver.t2, point.link.impedance);
      row.snr_array = fields::received_power(point.link, element_aperture) / noise;
      row.snr_rydberg = fields::received_power(point.link, a_eff) / noise;
    }
    const auto array = estimation::ArrayModel::half_wavelength(point.compare.n_elements, wavelength);
    auto vsa = array;
    vsa.kind = estimation::ArrayKind::VSA;
    row.ula = estimation::crb_ula(array, row.snr_array, point.compare.theta);
    row.vsa = estimation::crb_vsa(vsa, row.snr_array, point.compare.theta);

    estimation::SnrLimitedModel model{.qfim_exact = out.fisher.qfim, .nu = point.nu,
                                      .n_atoms = point.receiver.n_atoms(), .sigma_total_sq = point.sigma_total_sq};
    auto rf_only = [&](const estimation::SnrLimitedModel& m) {
      if (out.fisher.diverged[0]) return estimation::diverged_value;
      return 1.0 / estimation::effective_fisher(m, row.snr_rydberg)[0];
    };
    row.rydberg_lo_free = estimation::doa_variance_snr(model, row.snr_rydberg, scene.theta_rf, scene.theta_b);
    row.rydberg_lo_free_theta_rf = rf_only(model);
    model.sigma_total_sq = point.sigma_total_sq_lo_dressed;
    row.rydberg_lo_dressed = estimation::doa_variance_snr(model, row.snr_rydberg, scene.theta_rf, scene.theta_b);
    row.rydberg_lo_dressed_theta_rf = rf_only(model);
    out.rows.push_back(row);
  }
  return out;
}

void write_compare_csv(std::ostream& out, const SweepAxis& axis, const CompareResult& result) {
  out << column_name(axis.variable)
      << ",snr_array,snr_rydberg,rydberg_lo_free_rad2,rydberg_lo_dressed_rad2,ula_rad2,vsa_rad2"
         ",rydberg_lo_free_deg,rydberg_lo_dressed_deg,ula_deg,vsa_deg"
         ",rydberg_lo_free_theta_rf_rad2,rydberg_lo_dressed_theta_rf_rad2\n";
  auto deg = [](double var) { return std::sqrt(var) / c::deg; };
  for (const auto& r : result.rows) {
    out << fmt(r.x) << "," << fmt(r.snr_array) << "," << fmt(r.snr_rydberg) << "," << fmt(r.rydberg_lo_free) << ","
        << fmt(r.rydberg_lo_dressed) << "," << fmt(r.ula) << "," << fmt(r.vsa) << "," << fmt(deg(r.rydberg_lo_free))
        << "," << fmt(deg(r.rydberg_lo_dressed)) << "," << fmt(deg(r.ula)) << "," << fmt(deg(r.vsa)) << ","
        << fmt(r.rydberg_lo_free_theta_rf) << "," << fmt(r.rydberg_lo_dressed_theta_rf) << "\n";
  }
}

// ---------------------------------------------------------------------------

std::vector<double> projection_noise_sigma(const std::vector<double>& response, double shots) {
  if (!(shots > 0.0)) fail(ErrorKind::invalid_input, "projection noise: shot count must be positive");
  const double per_point = shots / static_cast<double>(response.size());
  return std::vector<double>(response.size(), std::sqrt(0.25 / per_point));
}

namespace {

double wrap(double a, double period) { return std::remainder(a, period); }

struct TrialOutcome {
  bool ok = false;
  double doa_error = 0.0;
  double theta_rf_error = 0.0;
};

TrialOutcome run_trial(const ScenarioConfig& cfg, const fields::PlaneWave& scene,
                       const reconstruction::BiasScanPlan& plan, const std::vector<double>& grid, double shots,
                       std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto hook = [&](const std::string&, std::vector<double>& response) {
    const auto sigma = projection_noise_sigma(response, shots);
    for (std::size_t i = 0; i < response.size(); ++i) response[i] += sigma[i] * normal(rng);
  };
  TrialOutcome out;
  try {
    const auto r = reconstruction::full_cycle(scene, cfg.bias, cfg.cycle_configs(), plan, grid, hook);
    out.doa_error = wrap(r.estimate.theta_doa - reconstruction::true_doa(scene), c::two_pi);
    out.theta_rf_error = wrap(r.estimate.theta_rf_hat - scene.theta_rf, c::pi);
    out.ok = true;
  } catch (const Error&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

MonteCarloStats monte_carlo(const ScenarioConfig& cfg, int trials, std::uint64_t seed, Exec exec) {
  if (trials < 2) fail(ErrorKind::invalid_input, "monte_carlo: need at least two trials");
  const auto scene = cfg.resolved_scene();
  const auto plan = cfg.resolved_plan();
  const auto grid = cfg.grid.values();
  const double shots = cfg.nu * cfg.receiver.n_atoms();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  for_each_index(outcomes.size(), exec, [&](std::size_t t) {
    outcomes[t] = run_trial(cfg, scene, plan, grid, shots, seed, t);
  });

  MonteCarloStats s;
  s.trials = trials;
  std::vector<const TrialOutcome*> good;
  for (const auto& o : outcomes) {
    if (o.ok)
      good.push_back(&o);
    else
      ++s.failures;
  }
  const double n = static_cast<double>(good.size());
  if (good.size() < 2) {
    s.doa_var = s.theta_rf_var = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  for (const auto* o : good) {
    s.doa_mean += o->doa_error / n;
    s.theta_rf_mean += o->theta_rf_error / n;
  }
  for (const auto* o : good) {
    s.doa_var += (o->doa_error - s.doa_mean) * (o->doa_error - s.doa_mean) / (n - 1.0);
    s.theta_rf_var += (o->theta_rf_error - s.theta_rf_mean) * (o->theta_rf_error - s.theta_rf_mean) / (n - 1.0);
  }
  return s;
}

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

namespace {

ordered_json vec_json(const Eigen::Vector3d& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json spectrum_json(const std::string& stage, const spectroscopy::LadderConfig& lad,
                           const spectroscopy::EitSpectrum& spec) {
  ordered_json j;
  j["stage"] = stage;
  j["fit_residual"] = spec.fit_residual;
  j["paths"] = ordered_json::array();
  for (std::size_t k = 0; k < spec.paths.size(); ++k) {
    const auto& p = spec.paths[k];
    ordered_json pj;
    pj["label"] = p.label();
    pj["q"] = p.q;
    pj["three_j"] = p.three_j;
    pj["pole_mhz"] = spectroscopy::pole_position(lad, p) / c::mhz;
    pj["rabi_sq_true"] = p.rabi * p.rabi;
    pj["rabi_sq_fit"] = k < spec.path_strength.size() ? spec.path_strength[k] : 0.0;
    j["paths"].push_back(pj);
  }
  j["peaks"] = ordered_json::array();
  for (const auto& pk : spec.peaks) {
    ordered_json pj;
    pj["center_mhz"] = pk.center / c::mhz;
    pj["prominence"] = pk.prominence;
    pj["fwhm_mhz"] = pk.fwhm / c::mhz;
    pj["path"] = pk.path ? ordered_json(spec.paths[*pk.path].label()) : ordered_json(nullptr);
    pj["unresolved"] = pk.unresolved;
    j["peaks"].push_back(pj);
  }
  j["warnings"] = spec.warnings;
  return j;
}

ordered_json fisher_json(const estimation::FisherResult& f) {
  ordered_json j;
  j["nu"] = f.nu;
  j["n_atoms"] = f.n_atoms;
  j["qfim_theta_rf"] = f.qfim(0, 0);
  j["qfim_theta_b"] = f.qfim(1, 1);
  j["qcrb_theta_rf_rad2"] = json_number(f.qcrb(0, 0));
  j["qcrb_theta_b_rad2"] = json_number(f.qcrb(1, 1));
  j["resolution_theta_rf_deg"] = json_number(f.resolution_deg[0]);
  j["resolution_theta_b_deg"] = json_number(f.resolution_deg[1]);
  j["diverged_theta_rf"] = f.diverged[0];
  j["diverged_theta_b"] = f.diverged[1];
  j["doa_var_rad2"] = json_number(f.theta_doa_var);
  return j;
}

}  // namespace

ordered_json run_doa(const ScenarioConfig& cfg, std::uint64_t seed, Exec exec) {
  const auto scene = cfg.resolved_scene();
  const auto plan = cfg.resolved_plan();
  const auto grid = cfg.grid.values();
  const auto r = reconstruction::full_cycle(scene, cfg.bias, cfg.cycle_configs(), plan, grid);

  ordered_json j;
  const double truth = reconstruction::true_doa(scene);
  j["scene"] = {{"theta_rf_deg", scene.theta_rf / c::deg},
                {"theta_b_deg", scene.theta_b / c::deg},
                {"e0_v_per_m", scene.e_amplitude},
                {"b_rf_t", scene.b_amplitude},
                {"k_hat", vec_json(scene.k_unit())},
                {"theta_doa_deg", truth / c::deg}};
  const auto& est = r.estimate;
  j["estimate"] = {{"theta_rf_deg", est.theta_rf_hat / c::deg},
                   {"theta_b_deg", est.theta_b_hat / c::deg},
                   {"theta_doa_deg", est.theta_doa / c::deg},
                   {"error_deg", std::remainder(est.theta_doa - truth, c::two_pi) / c::deg},
                   {"k_hat", vec_json(est.k_hat)},
                   {"e_vec", vec_json(est.e_vec)},
                   {"b_rf_vec", vec_json(est.b_rf_vector)}};
  ordered_json cand = ordered_json::array();
  for (double t : r.theta_rf.candidates) cand.push_back(t / c::deg);
  j["theta_rf"] = {{"theta_deg", r.theta_rf.theta / c::deg},
                   {"candidates_deg", cand},
                   {"pi_weight", r.theta_rf.pi_weight},
                   {"sigma_plus_weight", r.theta_rf.sigma_plus_weight},
                   {"sigma_minus_weight", r.theta_rf.sigma_minus_weight},
                   {"sign_resolved", r.theta_rf.sign_resolved},
                   {"evidence", r.theta_rf.evidence}};
  j["b_solve"] = {{"b_rf_vec", vec_json(r.b_solve.b)},
                  {"residual_t", r.b_solve.residual},
                  {"sign_matches", r.b_solve.sign_matches},
                  {"consistent", r.b_solve.consistent},
                  {"warnings", r.b_solve.warnings}};
  j["spectra"] = ordered_json::array();
  j["spectra"].push_back(spectrum_json("e1", cfg.e1, r.e1_spectrum));
  for (std::size_t i = 0; i < r.m1_spectra.size(); ++i)
    j["spectra"].push_back(spectrum_json("m1:" + std::to_string(i), cfg.m1, r.m1_spectra[i]));

  if (cfg.mc_trials > 0) {
    const auto fisher = estimation::qcrb(scene, cfg.bias, cfg.cycle_configs(), cfg.nu, cfg.fisher_options());
    const auto mc = monte_carlo(cfg, cfg.mc_trials, seed, exec);
    j["qcrb"] = fisher_json(fisher);
    j["monte_carlo"] = {{"noise_model", "projection"},
                        {"trials", mc.trials},
                        {"failures", mc.failures},
                        {"doa_error_mean_deg", json_number(mc.doa_mean / c::deg)},
                        {"doa_error_std_deg", json_number(std::sqrt(mc.doa_var) / c::deg)},
                        {"doa_var_rad2", json_number(mc.doa_var)},
                        {"theta_rf_error_mean_deg", json_number(mc.theta_rf_mean / c::deg)},
                        {"theta_rf_error_std_deg", json_number(std::sqrt(mc.theta_rf_var) / c::deg)},
                        {"theta_rf_var_rad2", json_number(mc.theta_rf_var)},
                        {"doa_var_over_qcrb", json_number(mc.doa_var / fisher.theta_doa_var)},
                        {"theta_rf_var_over_qcrb", json_number(mc.theta_rf_var / fisher.qcrb(0, 0))}};
  }
  return j;
}

}  // namespace rydoa::scenario
