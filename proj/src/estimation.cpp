#include "rydoa/estimation.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rydoa/constants.hpp"

namespace rydoa::estimation {

namespace c = rydoa::constants;
using spectroscopy::LadderConfig;
using spectroscopy::TransitionKind;

QfimEvaluation qfim_evaluate(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho) {
  const auto d = rho.rows();
  if (rho.cols() != d || drho.rows() != d || drho.cols() != d)
    fail(ErrorKind::invalid_input, "qfim: rho and drho must be square and of equal size");
  const double scale = std::max(drho.norm(), 1e-300);
  if ((drho - drho.adjoint()).norm() > 1e-8 * scale)
    fail(ErrorKind::invalid_input, "qfim: drho is not Hermitian");
  if (std::abs(drho.trace()) > 1e-8 * std::max(scale, 1.0))
    fail(ErrorKind::invalid_input, "qfim: drho is not traceless");

  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
  if (eig.info() != Eigen::Success) fail(ErrorKind::computation, "qfim: eigendecomposition failed");
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::MatrixXcd u = eig.eigenvectors();
  const Eigen::MatrixXcd a = u.adjoint() * drho * u;

  // Eigenvalues of the sandwich operator are lambda_i + lambda_j.
  const double cutoff = 1e-10 * 2.0 * lam.maxCoeff();
  QfimEvaluation out;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double w = std::norm(a(i, j));
      const double s = lam(i) + lam(j);
      if (s > cutoff)
        out.value += 2.0 * w / s;
      else
        out.kernel_weight += w;
    }
  out.kernel_flagged = out.kernel_weight > 1e-10 * drho.squaredNorm();
  return out;
}

double qfim_exact(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho) { return qfim_evaluate(rho, drho).value; }

const char* to_string(Parameter p) {
  switch (p) {
    case Parameter::theta_rf: return "theta_rf";
    case Parameter::theta_b: return "theta_b";
    case Parameter::theta_bias: return "theta_bias";
  }
  return "unknown";
}

spectroscopy::DensityMatrix scene_steady_state(const fields::PlaneWave& scene, const fields::BiasField& bias,
                                               const LadderConfig& cfg) {
  const auto decomp = cfg.kind == TransitionKind::E1 ? fields::decompose_e_field(scene.theta_rf, scene.e_amplitude)
                                                     : fields::decompose_b_field(scene.theta_b, scene.b_amplitude);
  return spectroscopy::steady_state(cfg, decomp, bias);
}

namespace {

Eigen::MatrixXcd rho_at(fields::PlaneWave scene, fields::BiasField bias, const LadderConfig& cfg, Parameter which,
                        double offset) {
  switch (which) {
    case Parameter::theta_rf: scene.theta_rf += offset; break;
    case Parameter::theta_b: scene.theta_b += offset; break;
    case Parameter::theta_bias: bias.theta_bias += offset; break;
  }
  return scene_steady_state(scene, bias, cfg).rho;
}

Eigen::MatrixXcd central(const fields::PlaneWave& scene, const fields::BiasField& bias, const LadderConfig& cfg,
                         Parameter which, double h) {
  return (rho_at(scene, bias, cfg, which, h) - rho_at(scene, bias, cfg, which, -h)) / (2.0 * h);
}

Eigen::MatrixXcd clean(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd out = 0.5 * (m + m.adjoint());
  const auto d = static_cast<double>(out.rows());
  out.diagonal().array() -= out.trace() / d;
  return out;
}

}  // namespace

Derivative drho_numeric(const fields::PlaneWave& scene, const fields::BiasField& bias, const LadderConfig& cfg,
                        Parameter which, double step) {
  if (!(step > 1e-6 && step < 1e-2)) fail(ErrorKind::invalid_input, "drho_numeric: step must lie in (1e-6, 1e-2)");
  if (which == Parameter::theta_rf && cfg.kind != TransitionKind::E1)
    fail(ErrorKind::invalid_input, "drho_numeric: theta_rf is encoded in the E1 ladder");
  if (which == Parameter::theta_b && cfg.kind != TransitionKind::M1)
    fail(ErrorKind::invalid_input, "drho_numeric: theta_b is encoded in the M1 ladder");

  const Eigen::MatrixXcd d1 = central(scene, bias, cfg, which, step);
  const Eigen::MatrixXcd d2 = central(scene, bias, cfg, which, step / 2.0);
  const Eigen::MatrixXcd d4 = central(scene, bias, cfg, which, step / 4.0);

  Derivative out;
  out.rho = rho_at(scene, bias, cfg, which, 0.0);
  out.coarse = clean((4.0 * d2 - d1) / 3.0);
  out.drho = clean((4.0 * d4 - d2) / 3.0);
  const double fine = out.drho.norm();
  const double diff = (out.drho - out.coarse).norm();
  // Differences at the level of steady-state round-off are not a
  // convergence failure.
  const double floor = 1e-9;
  out.consistency = fine > 0.0 ? diff / fine : 0.0;
  if (out.consistency > richardson_tolerance && diff > floor) {
    std::ostringstream msg;
    msg << "drho_numeric(" << to_string(which) << "): Richardson estimates at h = " << step << " and h/2 differ by "
        << out.consistency << " relative";
    throw DerivativeUnstable(msg.str(), out.drho, out.coarse);
  }
  return out;
}

FisherResult qcrb(const fields::PlaneWave& scene, const fields::BiasField& bias,
                  const reconstruction::CycleConfigs& cfgs, double nu, const FisherOptions& opts) {
  if (!(nu >= 1.0)) fail(ErrorKind::invalid_input, "qcrb: nu must be >= 1");
  if (!(opts.n_atoms >= 1.0)) fail(ErrorKind::invalid_input, "qcrb: n_atoms must be >= 1");
  FisherResult out;
  out.nu = nu;
  out.n_atoms = opts.n_atoms;

  const std::array<Derivative, 2> ders = {drho_numeric(scene, bias, cfgs.e1, Parameter::theta_rf, opts.step),
                                          drho_numeric(scene, bias, cfgs.m1, Parameter::theta_b, opts.step)};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto q = qfim_evaluate(ders[i].rho, ders[i].drho);
    const auto k = static_cast<Eigen::Index>(i);
    out.qfim(k, k) = q.value;
    out.kernel_flagged[i] = q.kernel_flagged;
    out.a_norm_sq[i] = ders[i].drho.squaredNorm();
    out.consistency[i] = ders[i].consistency;
    out.diverged[i] = q.value < divergence_threshold;
    out.qcrb(k, k) = out.diverged[i] ? diverged_value : 1.0 / (nu * opts.n_atoms * q.value);
    out.resolution_deg[i] = out.diverged[i] ? diverged_value : std::sqrt(out.qcrb(k, k)) / c::deg;
  }
  out.theta_doa_var = doa_variance(out, scene.theta_rf, scene.theta_b);
  return out;
}

Eigen::Matrix2d qfim_snr_approx(const std::array<double, 2>& a_norm_sq, double sigma_total_sq) {
  if (!(sigma_total_sq > 0.0)) fail(ErrorKind::invalid_input, "qfim_snr_approx: sigma_total_sq must be positive");
  const auto snr = snr_from_sensitivity(a_norm_sq, sigma_total_sq);
  Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
  f(0, 0) = 4.0 * sigma_total_sq * snr[0];
  f(1, 1) = 4.0 * sigma_total_sq * snr[1];
  return f;
}

std::array<double, 2> snr_from_sensitivity(const std::array<double, 2>& a_norm_sq, double sigma_total_sq) {
  if (!(sigma_total_sq > 0.0)) fail(ErrorKind::invalid_input, "snr: sigma_total_sq must be positive");
  return {a_norm_sq[0] / sigma_total_sq, a_norm_sq[1] / sigma_total_sq};
}

namespace {

double doa_of(double theta_rf, double theta_b) {
  const auto wave = fields::PlaneWave::with_b_angle(1.0, theta_rf, theta_b, 0.0);
  const Eigen::Vector3d k = wave.k_unit();
  return std::atan2(k.y(), k.x());
}

}  // namespace

Eigen::RowVector2d doa_jacobian(double theta_rf, double theta_b, double step) {
  auto diff = [step](double plus, double minus) { return std::remainder(plus - minus, c::two_pi) / (2.0 * step); };
  Eigen::RowVector2d j;
  j(0) = diff(doa_of(theta_rf + step, theta_b), doa_of(theta_rf - step, theta_b));
  j(1) = diff(doa_of(theta_rf, theta_b + step), doa_of(theta_rf, theta_b - step));
  return j;
}

double doa_variance(const Eigen::Matrix2d& qcrb, const std::array<bool, 2>& diverged, double theta_rf,
                    double theta_b) {
  const Eigen::RowVector2d j = doa_jacobian(theta_rf, theta_b);
  double var = 0.0;
  for (int i = 0; i < 2; ++i) {
    // A zero Jacobian does not rescue a diverged angle: the arrival angle
    // still depends on it at higher order.
    if (diverged[static_cast<std::size_t>(i)] || !std::isfinite(qcrb(i, i))) return diverged_value;
    if (std::abs(j(i)) <= 1e-9) continue;
    var += j(i) * j(i) * qcrb(i, i);
  }
  return var;
}

double doa_variance(const FisherResult& fisher, double theta_rf, double theta_b) {
  return doa_variance(fisher.qcrb, fisher.diverged, theta_rf, theta_b);
}

std::array<double, 2> effective_fisher(const SnrLimitedModel& model, double snr) {
  if (!(snr > 0.0)) fail(ErrorKind::invalid_input, "effective_fisher: snr must be positive");
  if (!(model.sigma_total_sq > 0.0)) fail(ErrorKind::invalid_input, "effective_fisher: sigma_total_sq must be positive");
  std::array<double, 2> out{};
  const double readout = 4.0 * model.sigma_total_sq * snr;
  for (int i = 0; i < 2; ++i) {
    const double ceiling = model.nu * model.n_atoms * model.qfim_exact(i, i);
    out[static_cast<std::size_t>(i)] = ceiling > 0.0 ? 1.0 / (1.0 / readout + 1.0 / ceiling) : 0.0;
  }
  return out;
}

double doa_variance_snr(const SnrLimitedModel& model, double snr, double theta_rf, double theta_b) {
  const auto f = effective_fisher(model, snr);
  Eigen::Matrix2d bound = Eigen::Matrix2d::Zero();
  std::array<bool, 2> diverged{};
  for (int i = 0; i < 2; ++i) {
    const auto k = static_cast<std::size_t>(i);
    diverged[k] = model.qfim_exact(i, i) < divergence_threshold;
    bound(i, i) = diverged[k] ? diverged_value : 1.0 / f[k];
  }
  return doa_variance(bound, diverged, theta_rf, theta_b);
}

}  // namespace rydoa::estimation
