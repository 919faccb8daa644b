#include <cmath>
#include <complex>

#include "rydoa/constants.hpp"
#include "rydoa/estimation.hpp"

namespace rydoa::estimation {

namespace c = rydoa::constants;

double ArrayModel::wavenumber() const { return c::two_pi / wavelength; }

void ArrayModel::validate() const {
  if (n_elements < 2) fail(ErrorKind::invalid_input, "array: n_elements must be >= 2");
  if (!(spacing > 0.0)) fail(ErrorKind::invalid_input, "array: spacing must be positive");
  if (!(wavelength > 0.0)) fail(ErrorKind::invalid_input, "array: wavelength must be positive");
}

ArrayModel ArrayModel::half_wavelength(int n, double wavelength, ArrayKind kind) {
  return ArrayModel{.n_elements = n, .wavelength = wavelength, .spacing = 0.5 * wavelength, .kind = kind};
}

double crb_ula(const ArrayModel& model, double snr, double theta) {
  model.validate();
  if (!(snr > 0.0)) fail(ErrorKind::invalid_input, "crb_ula: snr must be positive");
  const double n = model.n_elements;
  const double sum_sq = n * (n - 1.0) * (2.0 * n - 1.0) / 6.0;
  const double kd = model.wavenumber() * model.spacing;
  const double cs = std::cos(theta);
  const double info = 2.0 * snr * kd * kd * cs * cs * sum_sq;
  if (!(info > 1e-300) || std::abs(cs) < 1e-12) return diverged_value;
  return 1.0 / info;
}

double crb_vsa(double snr, const Eigen::VectorXcd& a, const Eigen::VectorXcd& da) {
  if (!(snr > 0.0)) fail(ErrorKind::invalid_input, "crb_vsa: snr must be positive");
  if (a.size() != da.size()) fail(ErrorKind::invalid_input, "crb_vsa: steering and derivative sizes differ");
  const double norm_sq = a.squaredNorm();
  if (!(norm_sq > 0.0)) fail(ErrorKind::invalid_input, "crb_vsa: steering vector is zero");
  // Xi da without forming Xi.
  const Eigen::VectorXcd projected = da - a * (a.dot(da) / norm_sq);
  const double info = 2.0 * snr * da.dot(projected).real();
  if (!(info > 1e-12 * 2.0 * snr * std::max(da.squaredNorm(), 1e-300))) return diverged_value;
  return 1.0 / info;
}

Steering vsa_steering(const ArrayModel& model, double theta) {
  model.validate();
  const double kd = model.wavenumber() * model.spacing;
  const double s = std::sin(theta), cs = std::cos(theta);
  const Eigen::Vector3d pol(-s, cs, 0.0);
  const Eigen::Vector3d dpol(-cs, -s, 0.0);
  const std::complex<double> i(0.0, 1.0);
  Steering out;
  out.a.resize(3 * model.n_elements);
  out.da.resize(3 * model.n_elements);
  for (int n = 0; n < model.n_elements; ++n) {
    const std::complex<double> phase = std::exp(i * (kd * n * s));
    const std::complex<double> dphase = i * (kd * n * cs) * phase;
    for (int k = 0; k < 3; ++k) {
      out.a(3 * n + k) = phase * pol(k);
      out.da(3 * n + k) = dphase * pol(k) + phase * dpol(k);
    }
  }
  return out;
}

double crb_vsa(const ArrayModel& model, double snr, double theta) {
  const auto st = vsa_steering(model, theta);
  return crb_vsa(snr, st.a, st.da);
}

double array_crb(const ArrayModel& model, double snr, double theta) {
  return model.kind == ArrayKind::ULA ? crb_ula(model, snr, theta) : crb_vsa(model, snr, theta);
}

}  // namespace rydoa::estimation
