#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rydoa/config.hpp"
#include "rydoa/constants.hpp"

using namespace rydoa;
using namespace rydoa::config;
namespace c = rydoa::constants;
using nlohmann::json;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::computation;  // sentinel: no error
}

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("rydoa_cfg_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

}  // namespace

TEST_CASE("fig3 preset in SI units") {
  const auto cfg = build(preset("fig3"));
  CHECK(cfg.e1.omega_p == doctest::Approx(c::two_pi * 6e6));
  CHECK(cfg.e1.omega_c == doctest::Approx(c::two_pi * 0.67e6));
  CHECK(cfg.m1.omega_c == doctest::Approx(c::two_pi * 0.8e6));
  CHECK(cfg.e1.gamma2 == doctest::Approx(c::two_pi * 5.2e6));
  CHECK(cfg.e1.gamma21 == doctest::Approx(0.5 * cfg.e1.gamma2));
  CHECK(cfg.e1.gamma31 == doctest::Approx(0.5 * cfg.e1.gamma3));
  CHECK(cfg.e1.gamma_rf == doctest::Approx(c::two_pi * 1e4));
  CHECK(cfg.scene.theta_rf == doctest::Approx(30.0 * c::deg));
  CHECK(cfg.scene.e_amplitude == 1.0);
  CHECK(cfg.bias.magnitude == doctest::Approx(2e-3));
  CHECK(cfg.bias.theta_bias == 0.0);
  CHECK(cfg.receiver.n_atoms() == doctest::Approx(4.89e10));
  CHECK(cfg.link.tx_power == doctest::Approx(1e-3));
  CHECK(cfg.link.tx_gain == doctest::Approx(std::pow(10.0, 0.215)));
  CHECK(cfg.link.wavelength == doctest::Approx(c::speed_of_light / 6.9e9));
  CHECK(cfg.grid.values().size() == 2001);
  CHECK(cfg.mc_trials == 0);

  const auto scene = cfg.resolved_scene();
  CHECK(scene.theta_b == doctest::Approx(scene.theta_rf + 0.5 * c::pi));
  CHECK(scene.b_amplitude == doctest::Approx(1.0 / c::speed_of_light));
  CHECK(cfg.resolved_plan().sign_factors ==
        reconstruction::sign_factors_for(cfg.plan, scene.b_vector()));
}

TEST_CASE("fig5 preset differs only where intended") {
  const auto f3 = preset("fig3");
  const auto f5 = preset("fig5");
  std::vector<std::string> changed;
  for (const auto& [k, v] : f5)
    if (f3.at(k) != v) changed.push_back(k);
  CHECK(changed == std::vector<std::string>{"bias.theta_bias_deg", "e1.omega_p_mhz", "m1.omega_p_mhz",
                                            "monte_carlo.trials"});
  const auto cfg = build(f5);
  CHECK(cfg.e1.omega_p == doctest::Approx(c::two_pi * 4e4));
  CHECK(cfg.bias.theta_bias == doctest::Approx(30.0 * c::deg));
  CHECK(cfg.mc_trials == 500);
}

TEST_CASE("serialize round-trips every preset") {
  for (const auto& name : preset_names()) {
    const auto cfg = build(preset(name));
    const auto again = load_scenario_json(json::parse(serialize(cfg).dump()));
    CHECK(equivalent(cfg, again));
  }
  auto a = build(preset("fig3"));
  auto b = a;
  b.scene.theta_rf *= 1.0 + 1e-6;
  CHECK(!equivalent(a, b));
  CHECK(equivalent(a, b, 1e-5));
}

TEST_CASE("schema covers every preset key exactly") {
  const auto f = preset("fig3");
  CHECK(schema().size() == f.size());
  for (const auto& k : schema()) {
    CHECK(f.contains(k.key));
    CHECK(!k.description.empty());
  }
}

TEST_CASE("unknown and missing keys are configuration errors") {
  CHECK(kind_of([] { apply_overrides(preset("fig3"), {parse_override("scene.bogus=1")}); }) == ErrorKind::config);
  CHECK(kind_of([] { load_scenario_json(json{{"preset", "fig3"}, {"scene", {{"nope", 1}}}}); }) ==
        ErrorKind::config);
  CHECK(kind_of([] { preset("no_such_preset"); }) == ErrorKind::config);

  TempDir tmp;
  const auto empty = tmp.write("empty.json", "");
  CHECK(load_flat(empty).empty());
  const auto msg = message_of([&] { load_scenario(empty); });
  CHECK(msg.find("missing keys") != std::string::npos);
  CHECK(msg.find("e1.omega_p_mhz") != std::string::npos);
  CHECK(msg.find("link.distance_m") != std::string::npos);

  const auto broken = tmp.write("broken.json", "{ not json");
  CHECK(kind_of([&] { load_flat(broken); }) == ErrorKind::config);
  CHECK(kind_of([&] { load_flat((tmp.path / "absent.json").string()); }) == ErrorKind::config);
}

TEST_CASE("out-of-range values are rejected") {
  for (const char* bad : {"e1.gamma2_mhz=-1", "grid.points=1", "estimation.nu=0.5", "receiver.t2_ns=0",
                          "link.distance_m=0", "scene.theta_rf_deg=\"x\""})
    CHECK_MESSAGE(kind_of([&] { build(apply_overrides(preset("fig3"), {parse_override(bad)})); }) !=
                      ErrorKind::computation,
                  std::string(bad));
  // A degenerate plan is a valid file; it fails when the plan is checked.
  const auto single = build(apply_overrides(preset("fig3"), {parse_override("plan.orientations=[[0,0,1]]")}));
  CHECK(kind_of([&] { single.resolved_plan().validate(); }) == ErrorKind::degenerate_plan);
}

TEST_CASE("overrides parse JSON values and leave presets untouched") {
  const auto [k, v] = parse_override("scene.theta_rf_deg=45");
  CHECK(k == "scene.theta_rf_deg");
  CHECK(v == json(45));
  CHECK(parse_override("scene.theta_b_deg=auto").second == json("auto"));
  CHECK(kind_of([] { parse_override("novalue"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_override("=3"); }) == ErrorKind::config);

  const auto changed = build(apply_overrides(preset("fig3"), {parse_override("scene.theta_rf_deg=45")}));
  CHECK(changed.scene.theta_rf == doctest::Approx(45.0 * c::deg));
  CHECK(build(preset("fig3")).scene.theta_rf == doctest::Approx(30.0 * c::deg));
}

TEST_CASE("presets found on the search path inherit from compiled ones") {
  TempDir tmp;
  tmp.write("tilted.json", R"({"preset": "fig5", "bias": {"theta_bias_deg": 10}})");
  tmp.write("chained.json", R"({"preset": "tilted", "scene": {"theta_rf_deg": 70}})");
  const std::string env = "/nonexistent:" + tmp.path.string();
  ::setenv(std::string(preset_path_env).c_str(), env.c_str(), 1);
  const auto cfg = build(preset("chained"));
  ::unsetenv(std::string(preset_path_env).c_str());
  CHECK(cfg.bias.theta_bias == doctest::Approx(10.0 * c::deg));
  CHECK(cfg.scene.theta_rf == doctest::Approx(70.0 * c::deg));
  CHECK(cfg.e1.omega_p == doctest::Approx(c::two_pi * 4e4));
  CHECK(kind_of([] { preset("tilted"); }) == ErrorKind::config);

  // A scenario file may name a preset too.
  const auto file = tmp.write("scenario.json", R"({"preset": "fig3", "compare": {"n_elements": 8}})");
  CHECK(load_scenario(file).compare.n_elements == 8);
}
