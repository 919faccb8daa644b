#include "rydoa/fields.hpp"

#include <cmath>
#include <numbers>

#include "rydoa/constants.hpp"
#include "rydoa/error.hpp"

namespace rydoa::fields {

namespace c = rydoa::constants;

PlaneWave PlaneWave::along_x(double e0, double theta_rf, double omega_rf) {
  return with_b_angle(e0, theta_rf, theta_rf + 0.5 * std::numbers::pi, omega_rf);
}

PlaneWave PlaneWave::with_b_angle(double e0, double theta_rf, double theta_b, double omega_rf) {
  PlaneWave w;
  w.e_amplitude = e0;
  w.theta_rf = theta_rf;
  w.theta_b = theta_b;
  w.frequency = omega_rf;
  w.b_amplitude = e0 / c::speed_of_light;
  return w;
}

Eigen::Vector3d PlaneWave::e_unit() const { return {0.0, std::cos(theta_rf), std::sin(theta_rf)}; }

Eigen::Vector3d PlaneWave::b_unit() const {
  // chi is the tilt of B_RF out of the y-z plane, rotating about E.
  const double chi = theta_b - theta_rf - 0.5 * std::numbers::pi;
  const Eigen::Vector3d in_plane(0.0, -std::sin(theta_rf), std::cos(theta_rf));
  return std::cos(chi) * in_plane + std::sin(chi) * Eigen::Vector3d::UnitX();
}

Eigen::Vector3d PlaneWave::k_unit() const { return e_unit().cross(b_unit()).normalized(); }

Eigen::Vector3d BiasField::axis() const { return {std::sin(theta_bias), 0.0, std::cos(theta_bias)}; }

double SphericalDecomposition::norm_sq() const {
  return std::norm(coeffs[0]) + std::norm(coeffs[1]) + std::norm(coeffs[2]);
}

namespace {

SphericalDecomposition planar(double theta, double amplitude, FieldKind kind) {
  const double s = std::sin(theta) / std::sqrt(2.0);
  SphericalDecomposition d;
  d.kind = kind;
  d.amplitude = amplitude;
  d.coeffs = {s, std::cos(theta), -s};
  return d;
}

}  // namespace

SphericalDecomposition decompose_e_field(double theta_rf, double amplitude) {
  return planar(theta_rf, amplitude, FieldKind::electric);
}

SphericalDecomposition decompose_b_field(double theta_b, double amplitude) {
  return planar(theta_b, amplitude, FieldKind::magnetic);
}

SphericalDecomposition decompose_along(const angular::SphericalBasis& basis, const Eigen::Vector3d& field,
                                       FieldKind kind) {
  SphericalDecomposition d;
  d.kind = kind;
  d.amplitude = field.norm();
  if (d.amplitude == 0.0) return d;
  d.coeffs = basis.components(field / d.amplitude);
  return d;
}

double zeeman_shift(double field_along_axis, double g_upper, angular::HalfInt m_upper, double g_lower,
                    angular::HalfInt m_lower) {
  return c::bohr_magneton * field_along_axis / c::hbar *
         (g_upper * m_upper.value() - g_lower * m_lower.value());
}

double zeeman_shift(const BiasField& bias, double g_upper, angular::HalfInt m_upper, double g_lower,
                    angular::HalfInt m_lower) {
  return zeeman_shift(bias.projected(), g_upper, m_upper, g_lower, m_lower);
}

void LinkBudget::validate() const {
  if (!(tx_power > 0.0)) fail(ErrorKind::invalid_input, "link: tx_power must be positive");
  if (!(tx_gain > 0.0)) fail(ErrorKind::invalid_input, "link: tx_gain must be positive");
  if (!(distance > 0.0)) fail(ErrorKind::invalid_input, "link: distance must be positive");
  if (!(wavelength > 0.0)) fail(ErrorKind::invalid_input, "link: wavelength must be positive");
  if (!(impedance > 0.0)) fail(ErrorKind::invalid_input, "link: impedance must be positive");
}

double received_power(const LinkBudget& link, double a_eff) {
  if (!(link.distance > 0.0)) fail(ErrorKind::invalid_input, "received_power: distance must be positive");
  if (a_eff < 0.0) fail(ErrorKind::invalid_input, "received_power: negative aperture");
  const double flux = link.tx_power * link.tx_gain / (4.0 * c::pi * link.distance * link.distance);
  return flux * a_eff;
}

double effective_aperture(double n_atoms, double dipole, double omega_rf, double t2, double z0) {
  return 4.0 * c::pi * z0 * n_atoms * dipole * dipole * omega_rf * t2 / c::hbar;
}

double field_at_receiver(const LinkBudget& link) {
  if (!(link.distance > 0.0)) fail(ErrorKind::invalid_input, "field_at_receiver: distance must be positive");
  const double flux = link.tx_power * link.tx_gain / (4.0 * c::pi * link.distance * link.distance);
  return std::sqrt(2.0 * link.impedance * flux);
}

}  // namespace rydoa::fields
