#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rydoa/estimation.hpp"
#include "rydoa/fields.hpp"
#include "rydoa/reconstruction.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::config {

inline constexpr std::string_view preset_path_env = "RYDOA_PRESET_PATH";

struct Receiver {
  double atom_density = 0.0;  // m^-3
  double cell_length = 0.0;   // m
  double t2 = 0.0;            // s
  double temperature = 0.0;   // K

  // Atoms in a cube of side cell_length.
  double n_atoms() const { return atom_density * cell_length * cell_length * cell_length; }
};

struct GridSpec {
  double start = 0.0;  // rad/s
  double stop = 0.0;
  std::size_t points = 0;

  std::vector<double> values() const;
};

// Settings for the classical-array comparison.
struct CompareSettings {
  double snr = 1.0;              // reference SNR when SNR is not swept
  int n_elements = 16;
  double theta = 0.0;            // array arrival angle from broadside, rad
  double element_gain = 1.0;     // linear, array element gain
};

struct ScenarioConfig {
  spectroscopy::LadderConfig e1;
  spectroscopy::LadderConfig m1;
  fields::PlaneWave scene;
  bool scene_along_x = true;  // theta_b tracks theta_rf + 90 deg
  bool scene_b_from_e = true;  // B_RF = E0 / c
  fields::BiasField bias;
  reconstruction::BiasScanPlan plan;
  bool plan_auto_signs = true;  // sign factors taken from the scene
  double sigma_total_sq = 1.0;
  double sigma_total_sq_lo_dressed = 1.0;
  double nu = 1.0;
  Receiver receiver;
  fields::LinkBudget link;
  GridSpec grid;
  CompareSettings compare;
  int mc_trials = 0;

  // Scene with theta_b / B_RF filled in and plan signs resolved.
  fields::PlaneWave resolved_scene() const;
  reconstruction::BiasScanPlan resolved_plan() const;
  reconstruction::CycleConfigs cycle_configs() const { return {e1, m1}; }
  estimation::FisherOptions fisher_options() const;
  // Thermal noise k_B T over the coherence bandwidth 1 / (2 pi T2), W.
  double thermal_noise_power() const;
  double rf_wavelength() const;

  void validate() const;
};

// Flat "section.key" view of a scenario in file units.
using FlatConfig = std::map<std::string, nlohmann::json>;

struct KeyInfo {
  std::string key;
  std::string unit;
  std::string description;
};

const std::vector<KeyInfo>& schema();

std::vector<std::string> preset_names();
// Compiled preset, or a <name>.json file on the preset search path.
FlatConfig preset(const std::string& name);

FlatConfig flatten(const nlohmann::json& doc);
nlohmann::ordered_json unflatten(const FlatConfig& flat);

ScenarioConfig build(const FlatConfig& flat);
FlatConfig to_flat(const ScenarioConfig& cfg);

// Parses "key=value"; the value is read as JSON and falls back to a string.
std::pair<std::string, nlohmann::json> parse_override(const std::string& assignment);
// Applies overrides on top of a flat config; unknown keys are rejected.
FlatConfig apply_overrides(FlatConfig base, const std::vector<std::pair<std::string, nlohmann::json>>& overrides);

// File contents may name a "preset" to inherit from. An empty file is an
// empty object.
FlatConfig load_flat(const std::string& path);
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig load_scenario_json(const nlohmann::json& doc);
FlatConfig resolve_json(const nlohmann::json& doc);

nlohmann::ordered_json serialize(const ScenarioConfig& cfg);

// Every schema key agrees to `rel` relative tolerance.
bool equivalent(const ScenarioConfig& a, const ScenarioConfig& b, double rel = 1e-12);

}  // namespace rydoa::config
