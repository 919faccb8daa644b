#include "rydoa/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "rydoa/constants.hpp"

namespace rydoa::config {

namespace c = rydoa::constants;
using nlohmann::json;
using spectroscopy::LadderConfig;
using spectroscopy::TransitionKind;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  fail(ErrorKind::config, key.empty() ? what : key + ": " + what);
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) config_error(key, "expected a number, got " + v.dump());
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_error(key, "must be finite");
  return x;
}

long as_integer(const std::string& key, const json& v) {
  if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>()))
    config_error(key, "expected an integer, got " + v.dump());
  return v.get<long>();
}

bool is_auto(const json& v) { return v.is_string() && v.get<std::string>() == "auto"; }

angular::HalfInt as_halfint(const std::string& key, const json& v) {
  if (v.is_number_integer()) return angular::HalfInt::integer(v.get<int>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return angular::HalfInt::integer(std::stoi(s));
      if (s.substr(slash + 1) != "2") config_error(key, "half-integers are written n/2");
      return angular::HalfInt::from_twice(std::stoi(s.substr(0, slash)));
    } catch (const std::logic_error&) {
      config_error(key, "cannot read angular momentum '" + s + "'");
    }
  }
  config_error(key, "expected an angular momentum such as \"1/2\"");
}

json halfint_json(angular::HalfInt h) { return h.str(); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct Entry {
  KeyInfo info;
  std::function<json(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const json&)> set;
};

// Linear-unit numeric key: file value * scale = internal value.
template <class Access>
Entry scaled(std::string key, std::string unit, std::string desc, double scale, Access access) {
  Entry e{{key, unit, std::move(desc)}, {}, {}};
  e.get = [access, scale](const ScenarioConfig& s) { return json(access(s) / scale); };
  e.set = [access, scale, key](ScenarioConfig& s, const json& v) { access(s) = as_number(key, v) * scale; };
  return e;
}

template <class Access>
Entry decibel(std::string key, std::string unit, std::string desc, double ref, Access access) {
  Entry e{{key, unit, std::move(desc)}, {}, {}};
  e.get = [access, ref](const ScenarioConfig& s) {
    return json(linear_to_db(access(s) / ref));
  };
  e.set = [access, ref, key](ScenarioConfig& s, const json& v) { access(s) = ref * db_to_linear(as_number(key, v)); };
  return e;
}

void add_ladder(std::vector<Entry>& out, const std::string& p, LadderConfig ScenarioConfig::*member) {
  auto lad = [member](auto& s) -> auto& { return s.*member; };
  auto field = [lad](double LadderConfig::*f) { return [lad, f](auto& s) -> auto& { return lad(s).*f; }; };
  out.push_back(scaled(p + ".omega_p_mhz", "MHz", "probe Rabi frequency / 2 pi", c::mhz, field(&LadderConfig::omega_p)));
  out.push_back(scaled(p + ".omega_c_mhz", "MHz", "coupling Rabi frequency / 2 pi", c::mhz, field(&LadderConfig::omega_c)));
  out.push_back(scaled(p + ".delta_p_mhz", "MHz", "probe detuning / 2 pi", c::mhz, field(&LadderConfig::delta_p)));
  out.push_back(scaled(p + ".delta_c_mhz", "MHz", "coupling detuning / 2 pi", c::mhz, field(&LadderConfig::delta_c)));
  out.push_back(scaled(p + ".gamma2_mhz", "MHz", "intermediate-state decay / 2 pi", c::mhz, field(&LadderConfig::gamma2)));
  out.push_back(scaled(p + ".gamma3_mhz", "MHz", "lower Rydberg decay / 2 pi", c::mhz, field(&LadderConfig::gamma3)));
  out.push_back(scaled(p + ".gamma4_mhz", "MHz", "upper Rydberg decay / 2 pi", c::mhz, field(&LadderConfig::gamma4)));
  out.push_back(scaled(p + ".gamma_rf_khz", "kHz", "RF dephasing / 2 pi", c::khz, field(&LadderConfig::gamma_rf)));
  out.push_back(scaled(p + ".omega0_ghz", "GHz", "bare RF transition frequency / 2 pi", 1e3 * c::mhz,
                       field(&LadderConfig::omega0)));
  out.push_back(scaled(p + ".delta_tilde_mhz", "MHz", "RF offset from resonance / 2 pi (>= 0)", c::mhz,
                       field(&LadderConfig::delta_tilde)));
  {
    Entry e{{p + ".delta_tilde_sign", "", "+1 or -1: omega_rf = omega0 +- delta_tilde"}, {}, {}};
    const std::string key = e.info.key;
    e.get = [lad](const ScenarioConfig& s) { return json(lad(s).delta_tilde_sign); };
    e.set = [lad, key](ScenarioConfig& s, const json& v) {
      const long x = as_integer(key, v);
      if (x != 1 && x != -1) config_error(key, "must be +1 or -1");
      lad(s).delta_tilde_sign = static_cast<int>(x);
    };
    out.push_back(std::move(e));
  }
  out.push_back(scaled(p + ".g_lower", "", "Lande factor of the lower Rydberg state", 1.0, field(&LadderConfig::g_lower)));
  out.push_back(scaled(p + ".g_upper", "", "Lande factor of the upper Rydberg state", 1.0, field(&LadderConfig::g_upper)));
  for (const bool upper : {false, true}) {
    Entry e{{p + (upper ? ".j_upper" : ".j_lower"), "", "total angular momentum, e.g. \"1/2\""}, {}, {}};
    const std::string key = e.info.key;
    e.get = [lad, upper](const ScenarioConfig& s) {
      const auto& l = lad(s);
      return halfint_json(upper ? l.j_upper : l.j_lower);
    };
    e.set = [lad, upper, key](ScenarioConfig& s, const json& v) {
      (upper ? lad(s).j_upper : lad(s).j_lower) = as_halfint(key, v);
    };
    out.push_back(std::move(e));
  }
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    add_ladder(t, "e1", &ScenarioConfig::e1);
    t.push_back(scaled("e1.dipole_ea0", "e a0", "E1 reduced dipole", c::elementary_charge * c::bohr_radius,
                       [](auto& s) -> auto& { return s.e1.reduced_element; }));
    add_ladder(t, "m1", &ScenarioConfig::m1);
    t.push_back(scaled("m1.moment_bohr", "mu_B", "M1 reduced matrix element", c::bohr_magneton,
                       [](auto& s) -> auto& { return s.m1.reduced_element; }));

    t.push_back(scaled("scene.e0_v_per_m", "V/m", "RF field amplitude", 1.0,
                       [](auto& s) -> auto& { return s.scene.e_amplitude; }));
    t.push_back(scaled("scene.theta_rf_deg", "deg", "polarization angle from +y in the y-z plane", c::deg,
                       [](auto& s) -> auto& { return s.scene.theta_rf; }));
    {
      Entry e{{"scene.theta_b_deg", "deg", "RF magnetic-field angle, or \"auto\" for a wave along +x"}, {}, {}};
      e.get = [](const ScenarioConfig& s) { return s.scene_along_x ? json("auto") : json(s.scene.theta_b / c::deg); };
      e.set = [](ScenarioConfig& s, const json& v) {
        s.scene_along_x = is_auto(v);
        if (!s.scene_along_x) s.scene.theta_b = as_number("scene.theta_b_deg", v) * c::deg;
      };
      t.push_back(std::move(e));
    }
    {
      Entry e{{"scene.b_rf_nt", "nT", "RF magnetic-field amplitude, or \"auto\" for E0 / c"}, {}, {}};
      e.get = [](const ScenarioConfig& s) { return s.scene_b_from_e ? json("auto") : json(s.scene.b_amplitude / 1e-9); };
      e.set = [](ScenarioConfig& s, const json& v) {
        s.scene_b_from_e = is_auto(v);
        if (!s.scene_b_from_e) s.scene.b_amplitude = as_number("scene.b_rf_nt", v) * 1e-9;
      };
      t.push_back(std::move(e));
    }

    t.push_back(scaled("bias.magnitude_mt", "mT", "static bias field", 1e-3,
                       [](auto& s) -> auto& { return s.bias.magnitude; }));
    t.push_back(scaled("bias.theta_bias_deg", "deg", "bias angle in the x-z plane from +z", c::deg,
                       [](auto& s) -> auto& { return s.bias.theta_bias; }));

    {
      Entry e{{"plan.orientations", "", "bias orientations for the magnetic scan, list of unit 3-vectors"}, {}, {}};
      e.get = [](const ScenarioConfig& s) {
        json arr = json::array();
        for (const auto& n : s.plan.orientations) arr.push_back({n.x(), n.y(), n.z()});
        return arr;
      };
      e.set = [](ScenarioConfig& s, const json& v) {
        const std::string key = "plan.orientations";
        if (!v.is_array() || v.empty()) config_error(key, "expected a non-empty list of 3-vectors");
        s.plan.orientations.clear();
        for (const auto& row : v) {
          if (!row.is_array() || row.size() != 3) config_error(key, "each orientation must have 3 components");
          s.plan.orientations.emplace_back(as_number(key, row[0]), as_number(key, row[1]), as_number(key, row[2]));
        }
      };
      t.push_back(std::move(e));
    }
    {
      Entry e{{"plan.sign_factors", "", "per-orientation sign triples, or \"auto\" to take them from the scene"}, {}, {}};
      e.get = [](const ScenarioConfig& s) {
        if (s.plan_auto_signs) return json("auto");
        json arr = json::array();
        for (const auto& f : s.plan.sign_factors) arr.push_back({f[0], f[1], f[2]});
        return arr;
      };
      e.set = [](ScenarioConfig& s, const json& v) {
        const std::string key = "plan.sign_factors";
        s.plan_auto_signs = is_auto(v);
        s.plan.sign_factors.clear();
        if (s.plan_auto_signs) return;
        if (!v.is_array()) config_error(key, "expected \"auto\" or a list of sign triples");
        for (const auto& row : v) {
          if (!row.is_array() || row.size() != 3) config_error(key, "each sign triple must have 3 entries");
          std::array<int, 3> f{};
          for (std::size_t k = 0; k < 3; ++k) f[k] = static_cast<int>(as_integer(key, row[k]));
          s.plan.sign_factors.push_back(f);
        }
      };
      t.push_back(std::move(e));
    }

    t.push_back(scaled("estimation.sigma_total_sq", "", "readout noise power, LO-free receiver", 1.0,
                       [](auto& s) -> auto& { return s.sigma_total_sq; }));
    t.push_back(scaled("estimation.sigma_total_sq_lo_dressed", "", "readout noise power, LO-dressed receiver", 1.0,
                       [](auto& s) -> auto& { return s.sigma_total_sq_lo_dressed; }));
    t.push_back(scaled("estimation.nu", "", "experimental repetitions", 1.0,
                       [](auto& s) -> auto& { return s.nu; }));

    t.push_back(scaled("receiver.atom_density_m3", "m^-3", "ground-state atom density", 1.0,
                       [](auto& s) -> auto& { return s.receiver.atom_density; }));
    t.push_back(scaled("receiver.cell_length_cm", "cm", "vapor cell edge length", 1e-2,
                       [](auto& s) -> auto& { return s.receiver.cell_length; }));
    t.push_back(scaled("receiver.t2_ns", "ns", "coherence time", 1e-9,
                       [](auto& s) -> auto& { return s.receiver.t2; }));
    t.push_back(scaled("receiver.temperature_k", "K", "cell temperature", 1.0,
                       [](auto& s) -> auto& { return s.receiver.temperature; }));

    t.push_back(decibel("link.tx_power_dbm", "dBm", "transmit power", 1e-3,
                        [](auto& s) -> auto& { return s.link.tx_power; }));
    t.push_back(decibel("link.tx_gain_dbi", "dBi", "transmit antenna gain", 1.0,
                        [](auto& s) -> auto& { return s.link.tx_gain; }));
    t.push_back(scaled("link.distance_m", "m", "transmitter-receiver distance", 1.0,
                       [](auto& s) -> auto& { return s.link.distance; }));
    t.push_back(scaled("link.impedance_ohm", "Ohm", "free-space impedance", 1.0,
                       [](auto& s) -> auto& { return s.link.impedance; }));

    t.push_back(scaled("grid.start_mhz", "MHz", "first coupling detuning / 2 pi", c::mhz,
                       [](auto& s) -> auto& { return s.grid.start; }));
    t.push_back(scaled("grid.stop_mhz", "MHz", "last coupling detuning / 2 pi", c::mhz,
                       [](auto& s) -> auto& { return s.grid.stop; }));
    {
      Entry e{{"grid.points", "", "number of detuning samples"}, {}, {}};
      e.get = [](const ScenarioConfig& s) { return json(s.grid.points); };
      e.set = [](ScenarioConfig& s, const json& v) {
        const long n = as_integer("grid.points", v);
        if (n < 2) config_error("grid.points", "must be >= 2");
        s.grid.points = static_cast<std::size_t>(n);
      };
      t.push_back(std::move(e));
    }

    t.push_back(scaled("compare.snr", "linear", "reference SNR when SNR is not swept", 1.0,
                       [](auto& s) -> auto& { return s.compare.snr; }));
    {
      Entry e{{"compare.n_elements", "", "array elements when N is not swept"}, {}, {}};
      e.get = [](const ScenarioConfig& s) { return json(s.compare.n_elements); };
      e.set = [](ScenarioConfig& s, const json& v) {
        s.compare.n_elements = static_cast<int>(as_integer("compare.n_elements", v));
      };
      t.push_back(std::move(e));
    }
    t.push_back(scaled("compare.theta_deg", "deg", "array arrival angle from broadside", c::deg,
                       [](auto& s) -> auto& { return s.compare.theta; }));
    t.push_back(decibel("compare.element_gain_dbi", "dBi", "array element gain", 1.0,
                        [](auto& s) -> auto& { return s.compare.element_gain; }));
    {
      Entry e{{"monte_carlo.trials", "", "noisy reconstruction trials for the doa command (0 = noiseless)"}, {}, {}};
      e.get = [](const ScenarioConfig& s) { return json(s.mc_trials); };
      e.set = [](ScenarioConfig& s, const json& v) {
        const long n = as_integer("monte_carlo.trials", v);
        if (n < 0) config_error("monte_carlo.trials", "must be >= 0");
        s.mc_trials = static_cast<int>(n);
      };
      t.push_back(std::move(e));
    }
    return t;
  }();
  return table;
}

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.info.key == key) return &e;
  return nullptr;
}

FlatConfig fig3_preset() {
  FlatConfig f;
  auto ladder = [&f](const std::string& p) {
    f[p + ".omega_p_mhz"] = 6.0;
    f[p + ".omega_c_mhz"] = 0.67;
    f[p + ".delta_p_mhz"] = 0.0;
    f[p + ".delta_c_mhz"] = 0.0;
    f[p + ".gamma2_mhz"] = 5.2;
    f[p + ".gamma3_mhz"] = 3.9;
    f[p + ".gamma4_mhz"] = 0.17;
    f[p + ".gamma_rf_khz"] = 10.0;
    f[p + ".omega0_ghz"] = 6.9;
    f[p + ".delta_tilde_mhz"] = 0.0;
    f[p + ".delta_tilde_sign"] = 1;
  };
  ladder("e1");
  f["e1.g_lower"] = 2.0;
  f["e1.g_upper"] = 0.67;
  f["e1.j_lower"] = "1/2";
  f["e1.j_upper"] = "1/2";
  f["e1.dipole_ea0"] = c::e1_dipole_ea0;
  ladder("m1");
  f["m1.omega_c_mhz"] = 0.8;
  f["m1.g_lower"] = 0.67;
  f["m1.g_upper"] = 1.33;
  f["m1.j_lower"] = "1/2";
  f["m1.j_upper"] = "3/2";
  f["m1.moment_bohr"] = 1.0;

  f["scene.e0_v_per_m"] = 1.0;
  f["scene.theta_rf_deg"] = 30.0;
  f["scene.theta_b_deg"] = "auto";
  f["scene.b_rf_nt"] = "auto";
  f["bias.magnitude_mt"] = 2.0;
  f["bias.theta_bias_deg"] = 0.0;
  f["plan.orientations"] = json::array({json::array({0.0, 0.0, 1.0}), json::array({0.0, 1.0, 0.0})});
  f["plan.sign_factors"] = "auto";

  f["estimation.sigma_total_sq"] = 1e4;
  f["estimation.sigma_total_sq_lo_dressed"] = 1e5;
  f["estimation.nu"] = 1.0;
  f["receiver.atom_density_m3"] = 4.89e16;
  f["receiver.cell_length_cm"] = 1.0;
  f["receiver.t2_ns"] = 100.0;
  f["receiver.temperature_k"] = 290.0;
  f["link.tx_power_dbm"] = 0.0;
  f["link.tx_gain_dbi"] = 2.15;
  f["link.distance_m"] = 100.0;
  f["link.impedance_ohm"] = c::free_space_impedance;
  f["grid.start_mhz"] = -60.0;
  f["grid.stop_mhz"] = 60.0;
  f["grid.points"] = 2001;
  f["compare.snr"] = 10.0;
  f["compare.n_elements"] = 16;
  f["compare.theta_deg"] = 0.0;
  f["compare.element_gain_dbi"] = 2.15;
  f["monte_carlo.trials"] = 0;
  return f;
}

FlatConfig fig5_preset() {
  FlatConfig f = fig3_preset();
  f["e1.omega_p_mhz"] = 0.04;
  f["m1.omega_p_mhz"] = 0.04;
  f["bias.theta_bias_deg"] = 30.0;
  f["monte_carlo.trials"] = 500;
  return f;
}

FlatConfig read_preset_file(const std::filesystem::path& path, int depth);

FlatConfig resolve(const json& doc, int depth) {
  if (!doc.is_object()) config_error("", "scenario must be a JSON object");
  FlatConfig base;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) config_error("preset", "expected a preset name");
    if (depth > 8) config_error("preset", "preset inheritance is nested too deeply");
    const std::string name = doc["preset"].get<std::string>();
    if (name == "fig3")
      base = fig3_preset();
    else if (name == "fig5")
      base = fig5_preset();
    else {
      bool found = false;
      if (const char* env = std::getenv(std::string(preset_path_env).c_str())) {
        std::stringstream dirs(env);
        std::string dir;
        while (std::getline(dirs, dir, ':')) {
          const auto candidate = std::filesystem::path(dir) / (name + ".json");
          if (!dir.empty() && std::filesystem::exists(candidate)) {
            base = read_preset_file(candidate, depth + 1);
            found = true;
            break;
          }
        }
      }
      if (!found) config_error("preset", "unknown preset '" + name + "'");
    }
  }
  json rest = doc;
  rest.erase("preset");
  const FlatConfig over = flatten(rest);
  for (const auto& [k, v] : over) {
    if (!find_entry(k)) config_error(k, "unknown key");
    base[k] = v;
  }
  return base;
}

FlatConfig read_preset_file(const std::filesystem::path& path, int depth) {
  std::ifstream in(path);
  if (!in) config_error("", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("", path.string() + ": " + e.what());
  }
  return resolve(doc, depth);
}

}  // namespace

std::vector<double> GridSpec::values() const { return spectroscopy::linear_grid(start, stop, points); }

fields::PlaneWave ScenarioConfig::resolved_scene() const {
  fields::PlaneWave w = scene;
  w.frequency = e1.omega_rf();
  if (scene_along_x) w.theta_b = w.theta_rf + 0.5 * c::pi;
  if (scene_b_from_e) w.b_amplitude = w.e_amplitude / c::speed_of_light;
  return w;
}

reconstruction::BiasScanPlan ScenarioConfig::resolved_plan() const {
  reconstruction::BiasScanPlan p = plan;
  if (plan_auto_signs) p.sign_factors = reconstruction::sign_factors_for(p, resolved_scene().b_vector());
  return p;
}

estimation::FisherOptions ScenarioConfig::fisher_options() const {
  return estimation::FisherOptions{.n_atoms = receiver.n_atoms(), .step = estimation::default_step};
}

double ScenarioConfig::thermal_noise_power() const {
  return c::boltzmann * receiver.temperature / (c::two_pi * receiver.t2);
}

double ScenarioConfig::rf_wavelength() const { return c::two_pi * c::speed_of_light / e1.omega_rf(); }

void ScenarioConfig::validate() const {
  auto guard = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      config_error(key, e.what());
    }
  };
  if (e1.kind != TransitionKind::E1 || m1.kind != TransitionKind::M1) config_error("", "ladder kinds are fixed");
  guard("e1", [&] { e1.validate(); });
  guard("m1", [&] { m1.validate(); });
  if (!(scene.e_amplitude > 0.0)) config_error("scene.e0_v_per_m", "must be positive");
  if (!scene_b_from_e && !(scene.b_amplitude > 0.0)) config_error("scene.b_rf_nt", "must be positive");
  if (!(bias.magnitude >= 0.0)) config_error("bias.magnitude_mt", "must be >= 0");
  for (const auto& n : plan.orientations)
    if (std::abs(n.norm() - 1.0) > 1e-9) config_error("plan.orientations", "orientations must be unit vectors");
  if (!plan_auto_signs && plan.sign_factors.size() != plan.orientations.size())
    config_error("plan.sign_factors", "one sign triple per orientation required");
  for (const auto& f : plan.sign_factors)
    for (int v : f)
      if (v != 1 && v != -1) config_error("plan.sign_factors", "signs must be +1 or -1");
  if (!(sigma_total_sq > 0.0)) config_error("estimation.sigma_total_sq", "must be positive");
  if (!(sigma_total_sq_lo_dressed > 0.0)) config_error("estimation.sigma_total_sq_lo_dressed", "must be positive");
  if (!(nu >= 1.0)) config_error("estimation.nu", "must be >= 1");
  if (!(receiver.atom_density > 0.0)) config_error("receiver.atom_density_m3", "must be positive");
  if (!(receiver.cell_length > 0.0)) config_error("receiver.cell_length_cm", "must be positive");
  if (!(receiver.t2 > 0.0)) config_error("receiver.t2_ns", "must be positive");
  if (!(receiver.temperature > 0.0)) config_error("receiver.temperature_k", "must be positive");
  if (!(link.distance > 0.0)) config_error("link.distance_m", "must be positive");
  if (!(link.impedance > 0.0)) config_error("link.impedance_ohm", "must be positive");
  if (!(grid.stop > grid.start)) config_error("grid.stop_mhz", "must exceed grid.start_mhz");
  if (grid.points < 2) config_error("grid.points", "must be >= 2");
  if (!(compare.snr > 0.0)) config_error("compare.snr", "must be positive");
  if (compare.n_elements < 2) config_error("compare.n_elements", "must be >= 2");
}

const std::vector<KeyInfo>& schema() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return keys;
}

std::vector<std::string> preset_names() { return {"fig3", "fig5"}; }

FlatConfig preset(const std::string& name) { return resolve(json{{"preset", name}}, 0); }

FlatConfig flatten(const json& doc) {
  FlatConfig out;
  if (doc.is_null()) return out;
  if (!doc.is_object()) config_error("", "scenario must be a JSON object");
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) config_error(section, "expected a section object");
    for (const auto& [key, value] : body.items()) out[section + "." + key] = value;
  }
  return out;
}

nlohmann::ordered_json unflatten(const FlatConfig& flat) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  // Schema order keeps files stable and readable.
  for (const auto& e : entries()) {
    const auto it = flat.find(e.info.key);
    if (it == flat.end()) continue;
    const auto dot = e.info.key.find('.');
    out[e.info.key.substr(0, dot)][e.info.key.substr(dot + 1)] = it->second;
  }
  return out;
}

ScenarioConfig build(const FlatConfig& flat) {
  for (const auto& [k, v] : flat)
    if (!find_entry(k)) config_error(k, "unknown key");
  std::vector<std::string> missing;
  for (const auto& e : entries())
    if (!flat.contains(e.info.key)) missing.push_back(e.info.key);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    config_error("", "missing keys: " + list);
  }
  ScenarioConfig cfg;
  cfg.e1.kind = TransitionKind::E1;
  cfg.m1.kind = TransitionKind::M1;
  for (const auto& e : entries()) e.set(cfg, flat.at(e.info.key));
  cfg.e1.derive_coherence_rates();
  cfg.m1.derive_coherence_rates();
  cfg.link.wavelength = cfg.rf_wavelength();
  cfg.validate();
  return cfg;
}

FlatConfig to_flat(const ScenarioConfig& cfg) {
  FlatConfig out;
  for (const auto& e : entries()) out[e.info.key] = e.get(cfg);
  return out;
}

std::pair<std::string, json> parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("", "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  return {key, value};
}

FlatConfig apply_overrides(FlatConfig base, const std::vector<std::pair<std::string, json>>& overrides) {
  for (const auto& [k, v] : overrides) {
    if (!find_entry(k)) config_error(k, "unknown key");
    base[k] = v;
  }
  return base;
}

FlatConfig resolve_json(const json& doc) { return resolve(doc, 0); }

ScenarioConfig load_scenario_json(const json& doc) { return build(resolve(doc, 0)); }

FlatConfig load_flat(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("", "cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc = json::object();
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      config_error("", path + ": " + e.what());
    }
  }
  return resolve(doc, 0);
}

ScenarioConfig load_scenario(const std::string& path) { return build(load_flat(path)); }

nlohmann::ordered_json serialize(const ScenarioConfig& cfg) { return unflatten(to_flat(cfg)); }

bool equivalent(const ScenarioConfig& a, const ScenarioConfig& b, double rel) {
  const FlatConfig fa = to_flat(a), fb = to_flat(b);
  std::function<bool(const json&, const json&)> same = [&](const json& x, const json& y) {
    if (x.is_number() && y.is_number()) {
      const double u = x.get<double>(), v = y.get<double>();
      return std::abs(u - v) <= rel * std::max(std::abs(u), std::abs(v));
    }
    if (x.is_array() && y.is_array()) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!same(x[i], y[i])) return false;
      return true;
    }
    return x == y;
  };
  for (const auto& [k, v] : fa)
    if (!same(v, fb.at(k))) return false;
  return true;
}

}  // namespace rydoa::config
