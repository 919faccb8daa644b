#pragma once

#include <array>
#include <complex>
#include <compare>
#include <string>

#include <Eigen/Dense>

namespace rydoa::angular {

/// Angular momentum quantum number stored as twice its value, so that
/// half-integers stay exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int n) { return HalfInt(2 * n); }
  static constexpr HalfInt half(int odd) { return HalfInt(odd); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

inline constexpr HalfInt operator""_j(unsigned long long n) { return HalfInt::integer(static_cast<int>(n)); }

enum class Validation { lenient, strict };

// Racah single-sum formula. Selection-rule violations give 0. A projection
// with |m| > j gives 0 in lenient mode and throws in strict mode; a parity
// mismatch between j and m always throws.
double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3,
                 Validation mode = Validation::lenient);

// <j1 m1; j2 m2 | J M>, Condon-Shortley phases.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M,
                      Validation mode = Validation::lenient);

/// Spherical unit vectors e_{-1}, e_0, e_{+1} attached to a quantization axis.
///
/// For the lab x axis, e_0 = x and e_{+-1} = -+(y +- i z)/sqrt(2). Other axes
/// are obtained by the minimal rotation carrying x onto the axis; the real
/// triad (axis, u, v) is that rotation applied to (x, y, z).
struct SphericalBasis {
  std::array<Eigen::Vector3cd, 3> e;  // indexed by q + 1
  Eigen::Vector3d axis;
  Eigen::Vector3d u;
  Eigen::Vector3d v;

  const Eigen::Vector3cd& operator[](int q) const { return e.at(static_cast<std::size_t>(q + 1)); }

  // Components F_q = e_q^dagger . F of a lab-frame vector.
  std::array<std::complex<double>, 3> components(const Eigen::Vector3d& f) const;
};

SphericalBasis basis_for_axis(const Eigen::Vector3d& axis);

// Rotation matrix taking the lab x axis onto `axis` (unit).
Eigen::Matrix3d rotation_from_x(const Eigen::Vector3d& axis);

}  // namespace rydoa::angular
