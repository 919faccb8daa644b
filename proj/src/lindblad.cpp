#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <unsupported/Eigen/KroneckerProduct>

#include "rydoa/error.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::spectroscopy {

LadderModel build_ladder(const LadderConfig& cfg, std::span<const TransitionPath> paths) {
  const Eigen::Index n = 3 + static_cast<Eigen::Index>(paths.size());
  LadderModel m;
  m.hamiltonian = Eigen::MatrixXcd::Zero(n, n);
  auto& h = m.hamiltonian;
  const double two_photon = cfg.delta_p + cfg.delta_c;
  h(1, 1) = cfg.delta_p;
  h(2, 2) = two_photon;
  h(0, 1) = h(1, 0) = 0.5 * cfg.omega_p;
  h(1, 2) = h(2, 1) = 0.5 * cfg.omega_c;

  auto jump = [n](Eigen::Index to, Eigen::Index from, double rate) {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(n, n);
    op(to, from) = std::sqrt(rate);
    return op;
  };
  m.collapse.push_back(jump(0, 1, cfg.gamma2));
  m.collapse.push_back(jump(1, 2, cfg.gamma3));
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(paths.size()); ++k) {
    const Eigen::Index u = 3 + k;
    const auto& p = paths[static_cast<std::size_t>(k)];
    h(u, u) = two_photon + p.detuning;
    h(2, u) = h(u, 2) = p.rabi;
    m.collapse.push_back(jump(2, u, cfg.gamma4));
    m.collapse.push_back(jump(u, u, 2.0 * cfg.gamma_rf));
  }
  return m;
}

Eigen::MatrixXcd liouvillian(const LadderModel& model) {
  const auto& h = model.hamiltonian;
  const Eigen::Index n = h.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const std::complex<double> i(0.0, 1.0);
  // vec(A X B) = (B^T kron A) vec(X)
  Eigen::MatrixXcd l = -i * (Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval());
  for (const auto& c : model.collapse) {
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    l += Eigen::kroneckerProduct(c.conjugate(), c).eval();
    l -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
    l -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
  }
  return l;
}

DensityMatrix solve_steady_state(const Eigen::MatrixXcd& liouv) {
  const Eigen::Index n2 = liouv.cols();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  if (n * n != n2 || liouv.rows() != n2) fail(ErrorKind::invalid_input, "steady state: Liouvillian is not square in d^2");

  // Scale to O(1) entries so that the rank threshold is meaningful.
  const double lnorm = liouv.norm();
  if (!(lnorm > 0.0)) fail(ErrorKind::degenerate_steady_state, "steady state: zero Liouvillian");
  Eigen::MatrixXcd a(n2 + 1, n2);
  a.topRows(n2) = liouv / lnorm;
  a.row(n2).setZero();
  for (Eigen::Index k = 0; k < n; ++k) a(n2, k * n + k) = 1.0;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n2 + 1);
  b(n2) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  qr.setThreshold(1e-13);
  if (qr.rank() < n2) {
    std::ostringstream os;
    os << "steady state: Liouvillian kernel has dimension " << (n2 - qr.rank() + 1) << " (rank " << qr.rank()
       << " of " << n2 << " with trace row)";
    fail(ErrorKind::degenerate_steady_state, os.str());
  }
  Eigen::VectorXcd x = qr.solve(b);
  const Eigen::VectorXcd r = b - a * x;
  x += qr.solve(r);

  DensityMatrix out;
  out.rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  out.rho /= out.rho.trace().real();
  const Eigen::Map<const Eigen::VectorXcd> v(out.rho.data(), n2);
  out.residual = (liouv * v).norm() / lnorm;
  if (!(out.residual < 1e-10)) {
    std::ostringstream os;
    os << "steady state: residual " << out.residual << " exceeds 1e-10 relative";
    fail(ErrorKind::degenerate_steady_state, os.str());
  }
  return out;
}

DensityMatrix steady_state(const LadderConfig& cfg, std::span<const TransitionPath> paths) {
  cfg.validate();
  return solve_steady_state(liouvillian(build_ladder(cfg, paths)));
}

DensityMatrix steady_state(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           const fields::BiasField& bias) {
  const auto paths = enumerate_paths(cfg, decomp, bias, PathOptions{.include_dark = true});
  return steady_state(cfg, paths);
}

}  // namespace rydoa::spectroscopy
