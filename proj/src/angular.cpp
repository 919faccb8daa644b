#include "rydoa/angular.hpp"

#include <cmath>
#include <cstdlib>
#include <algorithm>
#include <numbers>

#include "rydoa/error.hpp"

namespace rydoa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::config: return "config";
    case ErrorKind::insufficient_information: return "insufficient-information";
    case ErrorKind::degenerate_steady_state: return "degenerate-steady-state";
    case ErrorKind::derivative_unstable: return "derivative-unstable";
    case ErrorKind::degenerate_plan: return "degenerate-plan";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::computation: return "computation";
  }
  return "unknown";
}

}  // namespace rydoa

namespace rydoa::angular {

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

namespace {

// n! for the small arguments that occur here, exact in double up to 22!.
double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > 170) fail(ErrorKind::invalid_input, "factorial argument out of range");
  return table[static_cast<std::size_t>(n)];
}

int parity_sign(int n) { return (n % 2 == 0) ? 1 : -1; }

void check_pair(HalfInt j, HalfInt m, Validation mode, bool& out_of_range) {
  if (j.twice() < 0) fail(ErrorKind::invalid_input, "negative angular momentum " + j.str());
  if (std::abs(j.twice() - m.twice()) % 2 != 0)
    fail(ErrorKind::invalid_input, "projection " + m.str() + " does not match parity of j = " + j.str());
  if (std::abs(m.twice()) > j.twice()) {
    if (mode == Validation::strict)
      fail(ErrorKind::invalid_input, "projection " + m.str() + " exceeds j = " + j.str());
    out_of_range = true;
  }
}

}  // namespace

double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3,
                 Validation mode) {
  bool out_of_range = false;
  check_pair(j1, m1, mode, out_of_range);
  check_pair(j2, m2, mode, out_of_range);
  check_pair(j3, m3, mode, out_of_range);
  if (out_of_range) return 0.0;
  if (m1.twice() + m2.twice() + m3.twice() != 0) return 0.0;

  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  if (c > a + b || c < std::abs(a - b)) return 0.0;
  if ((a + b + c) % 2 != 0) return 0.0;

  // Everything below is in ordinary (not doubled) integers.
  const int jsum = (a + b + c) / 2;
  const double triangle = factorial((a + b - c) / 2) * factorial((a - b + c) / 2) *
                          factorial((-a + b + c) / 2) / factorial(jsum + 1);
  const int p1 = (a + m1.twice()) / 2, q1 = (a - m1.twice()) / 2;
  const int p2 = (b + m2.twice()) / 2, q2 = (b - m2.twice()) / 2;
  const int p3 = (c + m3.twice()) / 2, q3 = (c - m3.twice()) / 2;
  const double norm = std::sqrt(triangle * factorial(p1) * factorial(q1) * factorial(p2) *
                                factorial(q2) * factorial(p3) * factorial(q3));

  // t runs over integers keeping every factorial argument non-negative.
  const int t1 = (c - b + m1.twice()) / 2;   // j3 - j2 + m1
  const int t2 = (c - a - m2.twice()) / 2;   // j3 - j1 - m2
  const int t3 = (a + b - c) / 2;            // j1 + j2 - j3
  const int t4 = q1;                         // j1 - m1
  const int t5 = p2;                         // j2 + m2
  const int tmin = std::max({0, -t1, -t2});
  const int tmax = std::min({t3, t4, t5});

  double sum = 0.0;
  for (int t = tmin; t <= tmax; ++t) {
    const double denom = factorial(t) * factorial(t1 + t) * factorial(t2 + t) * factorial(t3 - t) *
                         factorial(t4 - t) * factorial(t5 - t);
    sum += parity_sign(t) / denom;
  }
  // (-1)^(j1 - j2 - m3)
  const int phase_twice = a - b - m3.twice();
  return parity_sign(phase_twice / 2) * norm * sum;
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M,
                      Validation mode) {
  const double tj = wigner_3j(j1, j2, J, m1, m2, -M, mode);
  if (tj == 0.0) return 0.0;
  const int phase_twice = j1.twice() - j2.twice() + M.twice();
  return std::sqrt(J.twice() + 1.0) * parity_sign(phase_twice / 2) * tj;
}

Eigen::Matrix3d rotation_from_x(const Eigen::Vector3d& axis) {
  const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
  const double c = x.dot(axis);
  if (c < -1.0 + 1e-12) {
    // Antipode: fixed half turn about z.
    return Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  }
  const Eigen::Vector3d w = x.cross(axis);
  Eigen::Matrix3d k;
  k << 0, -w.z(), w.y(),
       w.z(), 0, -w.x(),
       -w.y(), w.x(), 0;
  // Rodrigues form for the rotation taking x to axis.
  return Eigen::Matrix3d::Identity() + k + k * k / (1.0 + c);
}

SphericalBasis basis_for_axis(const Eigen::Vector3d& axis) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorKind::invalid_input, "quantization axis has zero norm");
  if (std::abs(n - 1.0) > 1e-12) fail(ErrorKind::invalid_input, "quantization axis is not a unit vector");

  const Eigen::Matrix3d r = rotation_from_x(axis);
  SphericalBasis out;
  out.axis = r.col(0);
  out.u = r.col(1);
  out.v = r.col(2);
  const std::complex<double> i(0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  const Eigen::Vector3cd uc = out.u.cast<std::complex<double>>();
  const Eigen::Vector3cd vc = out.v.cast<std::complex<double>>();
  out.e[0] = s * (uc - i * vc);
  out.e[1] = out.axis.cast<std::complex<double>>();
  out.e[2] = -s * (uc + i * vc);
  return out;
}

std::array<std::complex<double>, 3> SphericalBasis::components(const Eigen::Vector3d& f) const {
  const Eigen::Vector3cd fc = f.cast<std::complex<double>>();
  return {e[0].dot(fc), e[1].dot(fc), e[2].dot(fc)};
}

}  // namespace rydoa::angular
