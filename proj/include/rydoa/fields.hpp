#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "rydoa/angular.hpp"

namespace rydoa::fields {

/// Incident RF plane wave. E lies in the y-z plane at angle theta_rf from y.
/// theta_b is the in-plane angle of B_RF measured the same way; for a wave
/// travelling along +x, theta_b = theta_rf + pi/2. Any other theta_b tilts
/// B_RF out of the y-z plane about the E axis, which turns k within the
/// plane orthogonal to E.
struct PlaneWave {
  double e_amplitude = 1.0;   // V/m
  double theta_rf = 0.0;      // rad
  double theta_b = 0.5 * std::numbers::pi;  // rad
  double frequency = 0.0;     // rad/s
  double b_amplitude = 0.0;   // T

  static PlaneWave along_x(double e0, double theta_rf, double omega_rf);
  static PlaneWave with_b_angle(double e0, double theta_rf, double theta_b, double omega_rf);

  Eigen::Vector3d e_unit() const;
  Eigen::Vector3d b_unit() const;
  Eigen::Vector3d e_vector() const { return e_amplitude * e_unit(); }
  Eigen::Vector3d b_vector() const { return b_amplitude * b_unit(); }
  Eigen::Vector3d k_unit() const;
};

/// Static bias field in the x-z plane, theta_bias measured from +z.
struct BiasField {
  double magnitude = 0.0;   // T
  double theta_bias = 0.0;  // rad

  Eigen::Vector3d axis() const;
  // Field component entering the Zeeman shift.
  double projected() const { return magnitude * std::cos(theta_bias); }
};

enum class FieldKind { electric, magnetic };

struct SphericalDecomposition {
  FieldKind kind = FieldKind::electric;
  double amplitude = 0.0;                          // V/m or T
  std::array<std::complex<double>, 3> coeffs{};   // indexed by q + 1

  std::complex<double> operator[](int q) const { return coeffs.at(static_cast<std::size_t>(q + 1)); }
  double norm_sq() const;
};

SphericalDecomposition decompose_e_field(double theta_rf, double amplitude = 1.0);
SphericalDecomposition decompose_b_field(double theta_b, double amplitude = 1.0);

// Magnetic-field decomposition in the spherical basis of an arbitrary
// quantization axis, using the full 3-D field vector.
SphericalDecomposition decompose_along(const angular::SphericalBasis& basis, const Eigen::Vector3d& field,
                                       FieldKind kind);

// (mu_B B / hbar)(g_u m_u - g_l m_l) cos(theta_bias), rad/s.
double zeeman_shift(const BiasField& bias, double g_upper, angular::HalfInt m_upper, double g_lower,
                    angular::HalfInt m_lower);
// Same with the field component along the quantization axis given directly.
double zeeman_shift(double field_along_axis, double g_upper, angular::HalfInt m_upper, double g_lower,
                    angular::HalfInt m_lower);

struct LinkBudget {
  double tx_power = 1e-3;    // W
  double tx_gain = 1.0;      // linear
  double distance = 100.0;   // m
  double wavelength = 0.0;   // m
  double impedance = 377.0;  // Ohm

  void validate() const;
};

double received_power(const LinkBudget& link, double a_eff);
double effective_aperture(double n_atoms, double dipole, double omega_rf, double t2, double z0);

// Peak field amplitude for a received power density: E0 = sqrt(2 Z0 S).
double field_at_receiver(const LinkBudget& link);

}  // namespace rydoa::fields
