#include "rydoa/spectroscopy.hpp"

#include <cmath>

#include "rydoa/constants.hpp"
#include "rydoa/error.hpp"

namespace rydoa::spectroscopy {

namespace c = rydoa::constants;
using angular::HalfInt;

const char* to_string(TransitionKind kind) { return kind == TransitionKind::E1 ? "e1" : "m1"; }

LadderConfig& LadderConfig::derive_coherence_rates() {
  gamma21 = 0.5 * gamma2;
  gamma31 = 0.5 * gamma3;
  return *this;
}

void LadderConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::invalid_input, std::string("ladder: ") + name + " must be positive");
  };
  positive(gamma2, "gamma2");
  positive(gamma3, "gamma3");
  positive(gamma4, "gamma4");
  positive(gamma21, "gamma21");
  positive(gamma31, "gamma31");
  positive(gamma_rf, "gamma_rf");
  if (omega_p < 0.0 || omega_c < 0.0) fail(ErrorKind::invalid_input, "ladder: Rabi frequencies must be non-negative");
  if (delta_tilde_sign != 1 && delta_tilde_sign != -1)
    fail(ErrorKind::invalid_input, "ladder: delta_tilde_sign must be +1 or -1");
  const auto half = HalfInt::half(1);
  const auto three_half = HalfInt::half(3);
  if (kind == TransitionKind::E1 && !(j_lower == half && j_upper == half))
    fail(ErrorKind::invalid_input, "ladder: E1 requires j_lower = j_upper = 1/2");
  if (kind == TransitionKind::M1 && !(j_lower == half && j_upper == three_half))
    fail(ErrorKind::invalid_input, "ladder: M1 requires j_lower = 1/2, j_upper = 3/2");
}

std::string TransitionPath::label() const {
  const char* pol = q == 0 ? "pi" : (q > 0 ? "sigma+" : "sigma-");
  return std::string(pol) + "(" + m_lower.str() + "->" + m_upper.str() + ")";
}

std::vector<TransitionPath> enumerate_paths(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                                            double field_along_axis, PathOptions opts) {
  const bool kinds_match = (cfg.kind == TransitionKind::E1) == (decomp.kind == fields::FieldKind::electric);
  if (!kinds_match)
    fail(ErrorKind::invalid_input, std::string("enumerate_paths: decomposition does not match ") + to_string(cfg.kind));

  const HalfInt one = HalfInt::integer(1);
  std::vector<TransitionPath> out;
  for (int tl = -cfg.j_lower.twice(); tl <= cfg.j_lower.twice(); tl += 2) {
    for (int tu = -cfg.j_upper.twice(); tu <= cfg.j_upper.twice(); tu += 2) {
      const HalfInt ml = HalfInt::from_twice(tl);
      const HalfInt mu = HalfInt::from_twice(tu);
      const HalfInt dq = mu - ml;
      if (std::abs(dq.twice()) > 2) continue;
      const int q = dq.twice() / 2;
      const double tj = angular::wigner_3j(cfg.j_upper, one, cfg.j_lower, -mu, dq, ml);
      if (tj == 0.0) continue;
      const cplx coeff = decomp[q];
      // Normalized coefficients; cos(pi/2) and friends land near 1e-17.
      if (std::abs(coeff) < 1e-12 && !opts.include_dark) continue;

      // (-1)^(j_upper - m_upper) only matters inside the modulus.
      TransitionPath p;
      p.q = q;
      p.m_lower = ml;
      p.m_upper = mu;
      p.three_j = tj;
      p.rabi = decomp.amplitude / c::hbar * std::abs(coeff * tj * cfg.reduced_element);
      p.zeeman = fields::zeeman_shift(field_along_axis, cfg.g_upper, mu, cfg.g_lower, ml);
      p.detuning = cfg.delta_rf() - p.zeeman;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<TransitionPath> enumerate_paths(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                                            const fields::BiasField& bias, PathOptions opts) {
  return enumerate_paths(cfg, decomp, bias.projected(), opts);
}

cplx self_energy(std::span<const TransitionPath> paths, double gamma_rf, double offset) {
  if (!(gamma_rf > 0.0)) fail(ErrorKind::invalid_input, "self_energy: gamma_rf must be positive");
  cplx sum = 0.0;
  for (const auto& p : paths) sum += p.rabi * p.rabi / cplx(p.detuning + offset, gamma_rf);
  return sum;
}

cplx rho21_analytic(const LadderConfig& cfg, cplx sigma, double delta_c) {
  const double half_c = 0.5 * cfg.omega_c;
  const cplx inner = cplx(delta_c, cfg.gamma31) - sigma;
  const cplx denom = cplx(cfg.delta_p, cfg.gamma21) - half_c * half_c / inner;
  return -0.5 * cfg.omega_p / denom;
}

cplx rho21_sweep_point(const LadderConfig& cfg, std::span<const TransitionPath> paths, double delta_c) {
  const cplx sigma = self_energy(paths, cfg.gamma_rf, cfg.delta_p + delta_c);
  return rho21_analytic(cfg, sigma, delta_c);
}

}  // namespace rydoa::spectroscopy
