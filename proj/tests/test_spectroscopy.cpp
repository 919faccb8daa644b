#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "rydoa/config.hpp"
#include "rydoa/constants.hpp"
#include "rydoa/spectroscopy.hpp"

using namespace rydoa;
using namespace rydoa::spectroscopy;
namespace c = rydoa::constants;

namespace {

config::ScenarioConfig fig3() { return config::build(config::preset("fig3")); }

std::vector<TransitionPath> e1_paths(const config::ScenarioConfig& cfg, double theta_rf, PathOptions opts = {}) {
  return enumerate_paths(cfg.e1, fields::decompose_e_field(theta_rf, cfg.scene.e_amplitude), cfg.bias, opts);
}

void check_physical(const DensityMatrix& dm) {
  const auto& rho = dm.rho;
  CHECK((rho - rho.adjoint()).norm() < 1e-10);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
  CHECK(dm.residual < 1e-10);
}

}  // namespace

TEST_CASE("path enumeration follows the dipole selection rules") {
  const auto cfg = fig3();
  const auto e1 = e1_paths(cfg, 30.0 * c::deg);
  CHECK(e1.size() == 4);
  int pi = 0;
  for (const auto& p : e1) {
    CHECK(std::abs((p.m_upper - p.m_lower).twice()) <= 2);
    if (p.is_pi()) ++pi;
    CHECK(std::abs(p.three_j) == doctest::Approx(p.is_pi() ? 1.0 / std::sqrt(6.0) : 1.0 / std::sqrt(3.0)));
  }
  CHECK(pi == 2);
  // pi lines vanish at 90 deg; dark paths can be kept so the level count is fixed
  CHECK(e1_paths(cfg, 90.0 * c::deg).size() == 2);
  CHECK(e1_paths(cfg, 90.0 * c::deg, {.include_dark = true}).size() == 4);

  const auto m1 = enumerate_paths(cfg.m1, fields::decompose_b_field(120.0 * c::deg, 1e-9), cfg.bias);
  CHECK(m1.size() == 6);
  CHECK_THROWS_AS(enumerate_paths(cfg.m1, fields::decompose_e_field(0.1), cfg.bias), Error);
}

TEST_CASE("Rabi frequency carries the angular weights") {
  const auto cfg = fig3();
  const double theta = 30.0 * c::deg;
  for (const auto& p : e1_paths(cfg, theta)) {
    const double alpha = p.is_pi() ? std::cos(theta) : std::sin(theta) / std::sqrt(2.0);
    const double expect = cfg.scene.e_amplitude * c::e1_reduced_dipole / c::hbar * alpha * std::abs(p.three_j);
    CHECK(p.rabi == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("Liouvillian preserves the trace") {
  const auto cfg = fig3();
  const auto paths = e1_paths(cfg, 0.4, {.include_dark = true});
  const auto l = liouvillian(build_ladder(cfg.e1, paths));
  const Eigen::Index n = 3 + static_cast<Eigen::Index>(paths.size());
  Eigen::RowVectorXcd tr = Eigen::RowVectorXcd::Zero(n * n);
  for (Eigen::Index k = 0; k < n; ++k) tr(k * n + k) = 1.0;
  CHECK((tr * l).norm() / l.norm() < 1e-15);
}

TEST_CASE("steady states are physical around the presets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(0.5, 1.5), angle(-c::pi, c::pi);
  for (const char* name : {"fig3", "fig5"}) {
    const auto cfg = config::build(config::preset(name));
    for (int draw = 0; draw < 10; ++draw) {
      auto e1 = cfg.e1;
      e1.omega_p *= scale(rng);
      e1.omega_c *= scale(rng);
      e1.delta_c = (scale(rng) - 1.0) * 20.0 * c::mhz;
      const auto paths = enumerate_paths(e1, fields::decompose_e_field(angle(rng), scale(rng)), cfg.bias,
                                         {.include_dark = true});
      check_physical(steady_state(e1, paths));
    }
  }
}

TEST_CASE("two-level limit matches the Lorentzian coherence") {
  auto cfg = fig3().e1;
  cfg.omega_c = 0.0;
  cfg.omega_p = 1e-3 * cfg.gamma21;
  for (double dp : {-5.0, 0.0, 3.0}) {
    cfg.delta_p = dp * c::mhz;
    const auto dm = steady_state(cfg, std::span<const TransitionPath>{});
    const cplx lorentz = -0.5 * cfg.omega_p / cplx(cfg.delta_p, cfg.gamma21);
    CHECK(std::abs(dm.probe_coherence() - lorentz) < 1e-5 * std::abs(lorentz));
    CHECK(rho21_analytic(cfg, 0.0, 0.0) == lorentz);
  }
}

TEST_CASE("analytic coherence tracks the full model in the weak-probe regime") {
  auto cfg = fig3();
  cfg.e1.omega_p = 1e-2 * cfg.e1.gamma21;
  const auto paths = e1_paths(cfg, 30.0 * c::deg, {.include_dark = true});
  const auto grid = linear_grid(-60.0 * c::mhz, 60.0 * c::mhz, 121);
  const auto a = sweep_response(cfg.e1, paths, grid, ResponseModel::analytic);
  const auto f = sweep_response(cfg.e1, paths, grid, ResponseModel::full);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(a[i] - f[i]) < 0.05 * std::abs(f[i]));
}

TEST_CASE("self-energy sums the path poles") {
  const auto cfg = fig3();
  const auto paths = e1_paths(cfg, 0.7);
  cplx expect = 0.0;
  for (const auto& p : paths) expect += p.rabi * p.rabi / cplx(p.detuning + 1e6, cfg.e1.gamma_rf);
  CHECK(std::abs(self_energy(paths, cfg.e1.gamma_rf, 1e6) - expect) < 1e-12 * std::abs(expect));
  CHECK_THROWS_AS(self_energy(paths, 0.0), Error);
}

TEST_CASE("parallel and serial sweeps agree bit for bit") {
  const auto cfg = fig3();
  const auto paths = e1_paths(cfg, 0.5, {.include_dark = true});
  const auto grid = default_grid();
  CHECK(sweep_response(cfg.e1, paths, grid, ResponseModel::analytic, Exec::parallel) ==
        sweep_response(cfg.e1, paths, grid, ResponseModel::analytic, Exec::serial));
  const auto coarse = linear_grid(-40.0 * c::mhz, 40.0 * c::mhz, 9);
  CHECK(sweep_response(cfg.e1, paths, coarse, ResponseModel::full, Exec::parallel) ==
        sweep_response(cfg.e1, paths, coarse, ResponseModel::full, Exec::serial));
}

TEST_CASE("fig3 spectrum resolves four Zeeman peaks") {
  const auto cfg = fig3();
  const auto spec = sweep_spectrum(cfg.e1, fields::decompose_e_field(30.0 * c::deg, 1.0), cfg.bias, default_grid());
  REQUIRE(spec.peaks.size() == 4);
  for (const auto& pk : spec.peaks) {
    REQUIRE(pk.path.has_value());
    CHECK(!pk.unresolved);
    CHECK(std::abs(pk.center - pole_position(cfg.e1, spec.paths[*pk.path])) < 0.5 * pk.fwhm);
  }
  // Fitted strengths follow |alpha_q 3j|^2.
  for (std::size_t k = 0; k < spec.paths.size(); ++k)
    CHECK(spec.path_strength[k] == doctest::Approx(spec.paths[k].rabi * spec.paths[k].rabi).epsilon(0.02));
  CHECK(spec.warnings.empty());
}

TEST_CASE("zero bias collapses the spectrum to one peak") {
  auto cfg = fig3();
  cfg.bias.magnitude = 0.0;
  const auto spec = sweep_spectrum(cfg.e1, fields::decompose_e_field(30.0 * c::deg, 1.0), cfg.bias, default_grid());
  CHECK(spec.peaks.size() == 1);
}

TEST_CASE("polarization along the quantization normal drives sigma lines only") {
  const auto cfg = fig3();
  const auto spec = sweep_spectrum(cfg.e1, fields::decompose_e_field(90.0 * c::deg, 1.0), cfg.bias, default_grid());
  CHECK(spec.peaks.size() == 2);
  for (const auto& pk : spec.peaks) {
    REQUIRE(pk.path.has_value());
    CHECK(!spec.paths[*pk.path].is_pi());
  }
}

TEST_CASE("strength fit switches off undriven paths") {
  const auto cfg = fig3();
  const auto paths = e1_paths(cfg, 0.0, {.include_dark = true});
  const auto grid = default_grid();
  const auto response = sweep_response(cfg.e1, paths, grid);
  const auto fit = fit_path_strengths(cfg.e1, paths, grid, response);
  double total = 0.0, sigma = 0.0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    total += fit.strength[k];
    if (!paths[k].is_pi()) sigma += fit.strength[k];
  }
  CHECK(sigma < 1e-6 * total);
  CHECK(fit.rms < 1e-12);
}

TEST_CASE("grid helpers") {
  const auto g = linear_grid(-1.0, 1.0, 5);
  CHECK(g == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  const std::vector<double> centers{0.1};
  const auto r = refine_around(g, centers, 0.05, 11);
  CHECK(std::is_sorted(r.begin(), r.end()));
  CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
  CHECK(r.size() == g.size() + 11);
  CHECK(std::find(r.begin(), r.end(), 0.1) != r.end());
  CHECK(std::count_if(r.begin(), r.end(), [](double x) { return x >= 0.05 - 1e-12 && x <= 0.15 + 1e-12; }) == 11);
}

TEST_CASE("peak finder reports prominence and width of a Lorentzian") {
  const auto grid = linear_grid(-10.0, 10.0, 2001);
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) y[i] = 1.0 / (1.0 + grid[i] * grid[i]);
  const auto peaks = find_peaks(grid, y, 1e-3);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].center == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(peaks[0].height == doctest::Approx(1.0));
  // prominence above the higher edge minimum, width at half prominence
  const double base = 1.0 / 101.0;
  CHECK(peaks[0].prominence == doctest::Approx(1.0 - base).epsilon(1e-9));
  const double half = base + 0.5 * (1.0 - base);
  CHECK(peaks[0].fwhm == doctest::Approx(2.0 * std::sqrt(1.0 / half - 1.0)).epsilon(2e-3));
}
