#include "rydoa/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rydoa/constants.hpp"
#include "rydoa/error.hpp"

namespace rydoa::reconstruction {

namespace c = rydoa::constants;
using spectroscopy::EitSpectrum;

namespace {

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

// Sum of fitted strengths and of squared 3-j weights per polarization index.
struct QWeights {
  std::array<double, 3> strength{};
  std::array<double, 3> angular{};
};

QWeights collect(const EitSpectrum& spec) {
  if (spec.path_strength.size() != spec.paths.size())
    fail(ErrorKind::invalid_input, "spectrum carries no fitted path strengths");
  QWeights w;
  for (std::size_t k = 0; k < spec.paths.size(); ++k) {
    const auto idx = static_cast<std::size_t>(spec.paths[k].q + 1);
    w.strength[idx] += spec.path_strength[k];
    w.angular[idx] += spec.paths[k].three_j * spec.paths[k].three_j;
  }
  return w;
}

double per_q(const QWeights& w, int q) {
  const auto idx = static_cast<std::size_t>(q + 1);
  return w.angular[idx] > 0.0 ? w.strength[idx] / w.angular[idx] : 0.0;
}

}  // namespace

ThetaRfEstimate estimate_theta_rf(const EitSpectrum& spec) {
  const QWeights w = collect(spec);
  ThetaRfEstimate out;
  out.pi_weight = per_q(w, 0);
  out.sigma_plus_weight = per_q(w, +1);
  out.sigma_minus_weight = per_q(w, -1);
  const double sigma = out.sigma_plus_weight + out.sigma_minus_weight;
  const double total = out.pi_weight + sigma;
  if (!(total > 0.0)) fail(ErrorKind::insufficient_information, "theta_rf: spectrum carries no RF-driven weight");
  if (out.pi_weight <= 1e-6 * total)
    fail(ErrorKind::insufficient_information,
         "theta_rf: no pi weight; polarization is at a forbidden angle (theta_rf = 90 deg) where only sigma lines are driven");
  if (sigma <= 1e-6 * total)
    fail(ErrorKind::insufficient_information,
         "theta_rf: no sigma weight; polarization is at a forbidden angle (theta_rf = 0 or 180 deg) where only pi lines are driven");

  out.theta = std::atan2(std::sqrt(sigma), std::sqrt(out.pi_weight));
  out.candidates = {out.theta, wrap_pi(-out.theta), wrap_pi(std::numbers::pi - out.theta),
                    wrap_pi(std::numbers::pi + out.theta)};
  out.sigma_asymmetry = (out.sigma_plus_weight - out.sigma_minus_weight) / sigma;
  out.sign_resolved = std::abs(out.sigma_asymmetry) > 0.05;
  std::ostringstream ev;
  ev << "sigma+/sigma- weight asymmetry " << out.sigma_asymmetry;
  if (out.sign_resolved)
    ev << "; sign taken from the dominant sigma line";
  else
    ev << "; linear polarization drives sigma+ and sigma- equally, so theta, -theta, 180-theta and 180+theta "
          "are indistinguishable from weights";
  out.evidence = ev.str();
  if (out.sign_resolved && out.sigma_asymmetry < 0.0) out.theta = -out.theta;
  return out;
}

// ---------------------------------------------------------------------------

BiasScanPlan BiasScanPlan::default_plan() {
  BiasScanPlan p;
  p.orientations = {Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitY()};
  p.sign_factors = {{1, 1, 1}, {1, 1, 1}};
  return p;
}

void BiasScanPlan::validate() const {
  if (orientations.size() < 2) fail(ErrorKind::degenerate_plan, "bias plan needs at least two orientations");
  if (sign_factors.size() != orientations.size())
    fail(ErrorKind::invalid_input, "bias plan: one sign-factor triple per orientation required");
  for (const auto& s : sign_factors)
    for (int v : s)
      if (v != 1 && v != -1) fail(ErrorKind::invalid_input, "bias plan: sign factors must be +1 or -1");

  Eigen::MatrixXd axes(static_cast<Eigen::Index>(orientations.size()), 3);
  Eigen::MatrixXcd stacked(3 * static_cast<Eigen::Index>(orientations.size()), 3);
  for (std::size_t i = 0; i < orientations.size(); ++i) {
    if (std::abs(orientations[i].norm() - 1.0) > 1e-12)
      fail(ErrorKind::invalid_input, "bias plan: orientations must be unit vectors");
    axes.row(static_cast<Eigen::Index>(i)) = orientations[i].transpose();
    const auto basis = angular::basis_for_axis(orientations[i]);
    for (int q = -1; q <= 1; ++q) stacked.row(3 * static_cast<Eigen::Index>(i) + q + 1) = basis[q].adjoint();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr_stack(stacked);
  qr_stack.setThreshold(1e-10);
  if (qr_stack.rank() < 3) fail(ErrorKind::degenerate_plan, "bias plan: stacked basis matrix has rank < 3");
  // Amplitudes per axis only fix |B.n| and |B_perp|; two distinct axes are
  // needed to separate all three components.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_axes(axes);
  qr_axes.setThreshold(1e-10);
  if (qr_axes.rank() < 2) fail(ErrorKind::degenerate_plan, "bias plan: orientations are parallel");
}

std::vector<std::array<int, 3>> sign_factors_for(const BiasScanPlan& plan, const Eigen::Vector3d& b_rf) {
  std::vector<std::array<int, 3>> out;
  for (const auto& n : plan.orientations) {
    const auto basis = angular::basis_for_axis(n);
    auto sgn = [](double v) { return v < 0.0 ? -1 : 1; };
    out.push_back({sgn(basis.v.dot(b_rf)), sgn(basis.axis.dot(b_rf)), sgn(basis.u.dot(b_rf))});
  }
  return out;
}

std::vector<AmplitudeTriple> forward_amplitudes(const BiasScanPlan& plan, const Eigen::Vector3d& b_rf) {
  std::vector<AmplitudeTriple> out;
  for (const auto& n : plan.orientations) {
    const auto comps = angular::basis_for_axis(n).components(b_rf);
    out.push_back({std::abs(comps[0]), std::abs(comps[1]), std::abs(comps[2])});
  }
  return out;
}

namespace {

struct AmplitudeSystem {
  std::vector<Eigen::Vector3cd> rows;  // e_q^dagger as row coefficients (conjugated)
  std::vector<double> target;

  double residuals(const Eigen::Vector3d& b, Eigen::VectorXd& r, Eigen::MatrixXd* jac, double floor) const {
    const auto m = static_cast<Eigen::Index>(rows.size());
    r.resize(m);
    if (jac) jac->resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      const std::complex<double> z = row.dot(b.cast<std::complex<double>>());
      const double mag = std::abs(z);
      r(i) = mag - target[static_cast<std::size_t>(i)];
      if (jac) {
        const double denom = std::max(mag, floor);
        for (int j = 0; j < 3; ++j) (*jac)(i, j) = (std::conj(z) * std::conj(row(j))).real() / denom;
      }
    }
    return r.squaredNorm();
  }
};

Eigen::Vector3d gauss_newton(const AmplitudeSystem& sys, Eigen::Vector3d b, double scale) {
  Eigen::VectorXd r, r_trial;
  Eigen::MatrixXd jac;
  const double floor = 1e-12 * scale;
  double cost = sys.residuals(b, r, &jac, floor);
  double lambda = 1e-6;
  for (int it = 0; it < 200; ++it) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix3d a = jtj;
      a.diagonal().array() += lambda * (jtj.diagonal().array() + 1e-30);
      const Eigen::Vector3d step = a.ldlt().solve(-g);
      const Eigen::Vector3d trial = b + step;
      const double ct = sys.residuals(trial, r_trial, nullptr, floor);
      if (ct < cost) {
        const bool tiny = step.norm() < 1e-15 * scale;
        b = trial;
        cost = ct;
        sys.residuals(b, r, &jac, floor);
        lambda = std::max(lambda * 0.3, 1e-15);
        improved = true;
        if (tiny) return b;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return b;
}

}  // namespace

BSolve solve_b_rf(const BiasScanPlan& plan, std::span<const AmplitudeTriple> measured) {
  plan.validate();
  if (measured.size() != plan.orientations.size())
    fail(ErrorKind::invalid_input, "solve_b_rf: one amplitude triple per orientation required");

  AmplitudeSystem sys;
  std::vector<angular::SphericalBasis> bases;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    bases.push_back(angular::basis_for_axis(plan.orientations[i]));
    for (int q = -1; q <= 1; ++q) {
      const double m = measured[i][static_cast<std::size_t>(q + 1)];
      if (!(m >= 0.0) || !std::isfinite(m)) fail(ErrorKind::invalid_input, "solve_b_rf: amplitudes must be finite and >= 0");
      sys.rows.push_back(bases.back()[q].conjugate());
      sys.target.push_back(m);
      sum_sq += m * m;
    }
  }
  BSolve out;
  const double scale = std::sqrt(sum_sq / static_cast<double>(measured.size()));
  if (scale == 0.0) return out;

  std::vector<Eigen::Vector3d> starts;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) starts.emplace_back(scale * Eigen::Vector3d(sx, sy, sz) / std::sqrt(3.0));
  for (int j = 0; j < 3; ++j)
    for (int s : {-1, 1}) {
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      v(j) = s * scale;
      starts.push_back(v);
    }

  struct Root {
    Eigen::Vector3d b;
    double rms;
    int matches;
  };
  std::vector<Root> roots;
  Eigen::VectorXd r;
  for (const auto& s0 : starts) {
    const Eigen::Vector3d b = gauss_newton(sys, s0, scale);
    const double rms = std::sqrt(sys.residuals(b, r, nullptr, 0.0) / static_cast<double>(sys.rows.size()));
    int matches = 0;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      const std::array<double, 3> proj = {bases[i].v.dot(b), bases[i].axis.dot(b), bases[i].u.dot(b)};
      for (std::size_t k = 0; k < 3; ++k) {
        const bool zero = std::abs(proj[k]) < 1e-9 * scale;
        if (zero || (proj[k] > 0.0) == (plan.sign_factors[i][k] > 0)) ++matches;
      }
    }
    roots.push_back({b, rms, matches});
  }
  const double best_rms = std::min_element(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
                            return a.rms < b.rms;
                          })->rms;
  const double tie = best_rms * (1.0 + 1e-6) + 1e-12 * scale;
  const Root* pick = nullptr;
  for (const auto& root : roots) {
    if (root.rms > tie) continue;
    if (!pick || root.matches > pick->matches || (root.matches == pick->matches && root.rms < pick->rms)) pick = &root;
  }
  out.b = pick->b;
  out.residual = pick->rms;
  out.sign_matches = pick->matches;
  const int possible = 3 * static_cast<int>(bases.size());
  if (pick->matches < possible)
    out.warnings.push_back("no amplitude-consistent root honours every sign factor (" + std::to_string(pick->matches) +
                           "/" + std::to_string(possible) + ")");
  if (out.residual > 0.05 * scale) {
    out.consistent = false;
    out.warnings.push_back("inconsistent measurements: residual " + std::to_string(out.residual / scale) +
                           " of the amplitude scale");
  }
  return out;
}

// ---------------------------------------------------------------------------

DoaEstimate compose_doa(const Eigen::Vector3d& e_vec, const Eigen::Vector3d& b_vec) {
  const Eigen::Vector3d k = e_vec.cross(b_vec);
  const double scale = e_vec.norm() * b_vec.norm();
  if (!(scale > 0.0) || !(k.norm() > 1e-12 * scale))
    fail(ErrorKind::degenerate_geometry, "compose_doa: E and B are parallel or zero; not a plane wave");
  DoaEstimate out;
  out.e_vec = e_vec;
  out.b_rf_vector = b_vec;
  out.k_hat = k / k.norm();
  out.theta_doa = std::atan2(k.y(), k.x());
  const Eigen::Vector3d e_hat = e_vec.normalized();
  const Eigen::Vector3d b_hat = b_vec.normalized();
  out.theta_rf_hat = std::atan2(e_hat.z(), e_hat.y());
  const Eigen::Vector3d in_plane = Eigen::Vector3d::UnitX().cross(e_hat);
  const double chi = std::atan2(b_hat.x(), b_hat.dot(in_plane));
  out.theta_b_hat = wrap_pi(out.theta_rf_hat + 0.5 * std::numbers::pi + chi);
  return out;
}

double true_doa(const fields::PlaneWave& scene) {
  const Eigen::Vector3d k = scene.k_unit();
  return std::atan2(k.y(), k.x());
}

AmplitudeTriple amplitudes_from_strengths(const spectroscopy::LadderConfig& m1, const EitSpectrum& spec) {
  const QWeights w = collect(spec);
  const double element = std::abs(m1.reduced_element);
  if (!(element > 0.0)) fail(ErrorKind::invalid_input, "M1 reduced matrix element must be non-zero");
  AmplitudeTriple out{};
  for (int q = -1; q <= 1; ++q) out[static_cast<std::size_t>(q + 1)] = std::sqrt(per_q(w, q)) * c::hbar / element;
  return out;
}

CycleResult full_cycle(const fields::PlaneWave& scene, const fields::BiasField& bias, const CycleConfigs& cfgs,
                       const BiasScanPlan& plan, const std::vector<double>& grid, const ResponseHook& hook) {
  using namespace spectroscopy;
  if (cfgs.e1.kind != TransitionKind::E1 || cfgs.m1.kind != TransitionKind::M1)
    fail(ErrorKind::invalid_input, "full_cycle: expected one E1 and one M1 ladder");
  plan.validate();
  CycleResult out;

  // Stage 1: polarization from the E1 spectrum.
  {
    const auto decomp = fields::decompose_e_field(scene.theta_rf, scene.e_amplitude);
    auto paths = enumerate_paths(cfgs.e1, decomp, bias, PathOptions{.include_dark = true});
    auto response = sweep_response(cfgs.e1, paths, grid);
    if (hook) hook("e1", response);
    out.e1_spectrum = analyze_spectrum(cfgs.e1, std::move(paths), grid, std::move(response));
    out.theta_rf = estimate_theta_rf(out.e1_spectrum);
  }

  // Stage 2: magnetic amplitudes along each plan orientation.
  const Eigen::Vector3d b_true = scene.b_vector();
  for (std::size_t i = 0; i < plan.orientations.size(); ++i) {
    const auto basis = angular::basis_for_axis(plan.orientations[i]);
    const auto decomp = fields::decompose_along(basis, b_true, fields::FieldKind::magnetic);
    auto paths = enumerate_paths(cfgs.m1, decomp, bias.magnitude, PathOptions{.include_dark = true});
    // Magnetic lines are only ~gamma_rf wide; sample densely around each
    // known Zeeman pole.
    std::vector<double> poles;
    for (const auto& p : paths) poles.push_back(pole_position(cfgs.m1, p));
    auto m1_grid = refine_around(grid, poles, 5.0 * cfgs.m1.gamma_rf, 41);
    auto response = sweep_response(cfgs.m1, paths, m1_grid);
    if (hook) hook("m1:" + std::to_string(i), response);
    out.m1_spectra.push_back(analyze_spectrum(cfgs.m1, std::move(paths), std::move(m1_grid), std::move(response)));
    out.m1_amplitudes.push_back(amplitudes_from_strengths(cfgs.m1, out.m1_spectra.back()));
  }
  out.b_solve = solve_b_rf(plan, out.m1_amplitudes);
  const Eigen::Vector3d b_hat = out.b_solve.b;
  if (!(b_hat.norm() > 0.0)) fail(ErrorKind::insufficient_information, "full_cycle: recovered B_RF is zero");

  // Pick the polarization branch most orthogonal to B, then orient E so the
  // wave arrives from the front half-space (k_x >= 0).
  const double th = out.theta_rf.theta;
  const std::array<Eigen::Vector3d, 2> branches = {Eigen::Vector3d(0.0, std::cos(th), std::sin(th)),
                                                    Eigen::Vector3d(0.0, std::cos(th), -std::sin(th))};
  const Eigen::Vector3d bn = b_hat.normalized();
  Eigen::Vector3d e = std::abs(branches[0].dot(bn)) <= std::abs(branches[1].dot(bn)) ? branches[0] : branches[1];
  if (e.cross(bn).x() < 0.0) e = -e;
  out.estimate = compose_doa(scene.e_amplitude * e, b_hat);
  return out;
}

}  // namespace rydoa::reconstruction
