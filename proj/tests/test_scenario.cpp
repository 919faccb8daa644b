#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rydoa/constants.hpp"
#include "rydoa/scenario.hpp"

using namespace rydoa;
using namespace rydoa::scenario;
namespace c = rydoa::constants;

namespace {

config::ScenarioConfig fig3() { return config::build(config::preset("fig3")); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::computation;
}

}  // namespace

TEST_CASE("sweep axes") {
  const auto lin = parse_axis(Variable::theta_rf, "10:80:8", false);
  const auto v = lin.values();
  REQUIRE(v.size() == 8);
  CHECK(v.front() == 10.0);
  CHECK(v.back() == 80.0);
  CHECK(v[1] == doctest::Approx(20.0));

  const auto log = parse_axis(Variable::snr, "0.01:100:5", true).values();
  for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i] / log[i - 1] == doctest::Approx(10.0));
  CHECK(log.back() == 100.0);

  const auto n = parse_axis(Variable::n_elements, "2:64:5", false).values();
  for (double x : n) CHECK(x == std::round(x));

  for (const char* bad : {"10:10:5", "1:2", "1:2:x", "1:2:1", "a:2:3", "1:2:3.5"})
    CHECK_MESSAGE(kind_of([&] { parse_axis(Variable::theta_rf, bad, false).values(); }) == ErrorKind::config,
                  std::string(bad));
  CHECK(kind_of([] { parse_axis(Variable::snr, "-1:10:3", true).values(); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_variable("temperature"); }) == ErrorKind::config);
  CHECK(column_name(Variable::theta_rf) == "theta_rf_deg");
  CHECK(parse_variable("b_bias") == Variable::b_bias);
}

TEST_CASE("swept values land in the scenario in SI units") {
  const auto cfg = fig3();
  CHECK(with_value(cfg, Variable::theta_rf, 45.0).scene.theta_rf == doctest::Approx(45.0 * c::deg));
  CHECK(with_value(cfg, Variable::theta_bias, 20.0).bias.theta_bias == doctest::Approx(20.0 * c::deg));
  CHECK(with_value(cfg, Variable::b_bias, 3.0).bias.magnitude == doctest::Approx(3e-3));
  CHECK(with_value(cfg, Variable::e0, 0.2).scene.e_amplitude == 0.2);
  CHECK(with_value(cfg, Variable::snr, 50.0).compare.snr == 50.0);
  CHECK(with_value(cfg, Variable::n_elements, 32.0).compare.n_elements == 32);

  const auto far = with_value(cfg, Variable::distance, 400.0);
  CHECK(far.link.distance == 400.0);
  CHECK(far.scene.e_amplitude == doctest::Approx(fields::field_at_receiver(far.link)));
  CHECK(with_value(cfg, Variable::distance, 200.0).scene.e_amplitude == doctest::Approx(2.0 * far.scene.e_amplitude));

  const auto many = with_value(cfg, Variable::n_atoms, 1e8);
  CHECK(many.receiver.n_atoms() == doctest::Approx(1e8));
  CHECK(many.receiver.cell_length == cfg.receiver.cell_length);

  CHECK(kind_of([&] { with_value(cfg, Variable::e0, -1.0); }) == ErrorKind::config);
}

TEST_CASE("number formatting") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(-2.5e-12) == "-2.5e-12");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fmt(std::nan("")) == "nan");
  CHECK(json_number(1.5) == nlohmann::ordered_json(1.5));
  CHECK(json_number(std::numeric_limits<double>::infinity()) == nlohmann::ordered_json("inf"));
}

TEST_CASE("provenance header") {
  std::ostringstream out;
  write_header(out, {"qcrb-sweep --var e0", "fig5", {"scene.e0_v_per_m=2"}, 7});
  const std::string s = out.str();
  CHECK(s.rfind("# rydoa 0.1.0\n", 0) == 0);
  CHECK(s.find("# command: qcrb-sweep --var e0\n") != std::string::npos);
  CHECK(s.find("# preset: fig5\n") != std::string::npos);
  CHECK(s.find("scene.e0_v_per_m=2") != std::string::npos);
  CHECK(s.find("# seed: 7\n") != std::string::npos);
}

TEST_CASE("projection noise uses the worst-case single-shot variance") {
  // 1.2 is beyond the physical bound; the noise must not vanish there
  const std::vector<double> y{0.0, 0.1, 1.2, -0.3};
  for (double s : projection_noise_sigma(y, 400.0)) CHECK(s == doctest::Approx(std::sqrt(0.25 / 100.0)));
  CHECK_THROWS_AS(projection_noise_sigma(y, 0.0), Error);
}

TEST_CASE("qcrb sweep is identical serial and parallel") {
  auto cfg = fig3();
  SweepSpec spec;
  spec.primary = parse_axis(Variable::theta_rf, "0:90:7", false);
  spec.secondary = parse_axis(Variable::b_bias, "1:3:2", false);
  const auto par = qcrb_sweep(cfg, spec, Exec::parallel);
  const auto ser = qcrb_sweep(cfg, spec, Exec::serial);
  REQUIRE(par.size() == 14);
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].x == ser[i].x);
    CHECK(par[i].fisher.qfim == ser[i].fisher.qfim);
    CHECK(par[i].status == ser[i].status);
  }
  // the second axis varies fastest
  CHECK(par[1].x == std::vector<double>{0.0, 3.0});
  CHECK(par[2].x == std::vector<double>{15.0, 1.0});

  std::ostringstream csv;
  write_qcrb_csv(csv, spec, par);
  const std::string header = csv.str().substr(0, csv.str().find('\n'));
  CHECK(header.rfind("theta_rf_deg,b_bias_mt,qcrb_theta_rf_rad2,resolution_theta_rf_deg", 0) == 0);
  CHECK(header.find(",status") != std::string::npos);

  SweepSpec snr;
  snr.primary = parse_axis(Variable::snr, "1:10:3", false);
  CHECK(kind_of([&] { qcrb_sweep(cfg, snr); }) == ErrorKind::config);
}

TEST_CASE("comparison rows follow the array bounds") {
  const auto cfg = fig3();
  const auto axis = parse_axis(Variable::snr, "1:1000:4", true);
  const auto r = compare_sweep(cfg, axis);
  REQUIRE(r.rows.size() == 4);
  const double wavelength = cfg.rf_wavelength();
  for (const auto& row : r.rows) {
    const auto ula = estimation::ArrayModel::half_wavelength(cfg.compare.n_elements, wavelength);
    CHECK(row.ula == doctest::Approx(estimation::crb_ula(ula, row.x, cfg.compare.theta)));
    CHECK(row.snr_array == row.x);
    CHECK(row.snr_rydberg == row.x);
  }
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].ula < r.rows[i - 1].ula);
    CHECK(r.rows[i].rydberg_lo_free_theta_rf < r.rows[i - 1].rydberg_lo_free_theta_rf);
    // the dressed readout has more signal variance, so more information
    CHECK(r.rows[i].rydberg_lo_dressed_theta_rf <= r.rows[i].rydberg_lo_free_theta_rf);
  }
  CHECK(kind_of([&] { compare_sweep(cfg, parse_axis(Variable::theta_rf, "1:2:2", false)); }) == ErrorKind::config);

  const auto dist = compare_sweep(cfg, parse_axis(Variable::distance, "10:1000:3", true));
  CHECK(dist.rows[0].snr_array / dist.rows[1].snr_array == doctest::Approx(100.0));
  CHECK(dist.rows[0].snr_rydberg / dist.rows[1].snr_rydberg == doctest::Approx(100.0));
}

TEST_CASE("Monte Carlo is reproducible for a fixed seed") {
  const auto cfg = fig3();
  const auto a = monte_carlo(cfg, 3, 42, Exec::parallel);
  const auto b = monte_carlo(cfg, 3, 42, Exec::serial);
  CHECK(a.trials == 3);
  CHECK(a.doa_mean == b.doa_mean);
  CHECK(a.doa_var == b.doa_var);
  CHECK(a.failures == b.failures);
  const auto other = monte_carlo(cfg, 3, 43);
  CHECK(other.doa_mean != a.doa_mean);
}
