#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rydoa/error.hpp"
#include "rydoa/fields.hpp"
#include "rydoa/reconstruction.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::estimation {

inline constexpr double diverged_value = std::numeric_limits<double>::infinity();

// Single-atom Fisher information below this is reported as diverged.
inline constexpr double divergence_threshold = 1e-12;

struct QfimEvaluation {
  double value = 0.0;
  double kernel_weight = 0.0;  // |A_ij|^2 dropped on the pseudo-inverse kernel
  bool kernel_flagged = false; // kernel_weight above 1e-10 of ||A||_F^2
};

// 2 vec(A)^H (rho* (x) I + I (x) rho)^+ vec(A), evaluated in the eigenbasis
// of rho. Pairs with lambda_i + lambda_j below 1e-10 of the largest pair sum
// form the kernel.
QfimEvaluation qfim_evaluate(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho);
double qfim_exact(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho);

enum class Parameter { theta_rf, theta_b, theta_bias };

const char* to_string(Parameter p);

struct Derivative {
  Eigen::MatrixXcd rho;        // steady state at the nominal point
  Eigen::MatrixXcd drho;       // Richardson estimate with steps h/2, h/4
  Eigen::MatrixXcd coarse;     // Richardson estimate with steps h, h/2
  double consistency = 0.0;    // ||drho - coarse||_F / ||drho||_F (0 when both vanish)
};

class DerivativeUnstable : public Error {
 public:
  DerivativeUnstable(const std::string& what, Eigen::MatrixXcd fine, Eigen::MatrixXcd coarse)
      : Error(ErrorKind::derivative_unstable, what), fine_(std::move(fine)), coarse_(std::move(coarse)) {}
  const Eigen::MatrixXcd& fine() const { return fine_; }
  const Eigen::MatrixXcd& coarse() const { return coarse_; }

 private:
  Eigen::MatrixXcd fine_;
  Eigen::MatrixXcd coarse_;
};

inline constexpr double default_step = 1e-4;
inline constexpr double richardson_tolerance = 1e-4;

// Steady state of `cfg` for the scene's field decomposed with the
// closed-form polarization coefficients (E1: theta_rf, M1: theta_b).
spectroscopy::DensityMatrix scene_steady_state(const fields::PlaneWave& scene, const fields::BiasField& bias,
                                               const spectroscopy::LadderConfig& cfg);

// d rho / d(parameter) by central differences with one Richardson level,
// Hermitian-symmetrized and made traceless.
Derivative drho_numeric(const fields::PlaneWave& scene, const fields::BiasField& bias,
                        const spectroscopy::LadderConfig& cfg, Parameter which, double step = default_step);

struct FisherOptions {
  double n_atoms = 1.0;  // independent atoms sharing the steady state
  double step = default_step;
};

struct FisherResult {
  Eigen::Matrix2d qfim = Eigen::Matrix2d::Zero();  // single-atom, (theta_rf, theta_b)
  Eigen::Matrix2d qcrb = Eigen::Matrix2d::Zero();  // rad^2
  double nu = 1.0;
  double n_atoms = 1.0;
  std::array<bool, 2> diverged{};
  std::array<double, 2> a_norm_sq{};       // ||d rho / d theta_i||_F^2
  std::array<double, 2> consistency{};     // Richardson self-consistency per parameter
  std::array<bool, 2> kernel_flagged{};
  double theta_doa_var = 0.0;               // rad^2
  std::array<double, 2> resolution_deg{};  // sqrt(qcrb_ii) in degrees
};

// F_rf from the E1 steady state, F_b from the M1 steady state; the
// bound is (nu n_atoms F)^-1 per diagonal entry.
FisherResult qcrb(const fields::PlaneWave& scene, const fields::BiasField& bias,
                  const reconstruction::CycleConfigs& cfgs, double nu, const FisherOptions& opts = {});

// F ~ 4 sigma^2 diag(SNR_i) with SNR_i = ||A_i||^2 / sigma^2.
Eigen::Matrix2d qfim_snr_approx(const std::array<double, 2>& a_norm_sq, double sigma_total_sq);
std::array<double, 2> snr_from_sensitivity(const std::array<double, 2>& a_norm_sq, double sigma_total_sq);

// d theta_doa / d(theta_rf, theta_b) by central differences of the wave
// geometry.
Eigen::RowVector2d doa_jacobian(double theta_rf, double theta_b, double step = 1e-6);

// J F^-1 J^T using the result's qcrb; +inf when either angle is diverged.
double doa_variance(const FisherResult& fisher, double theta_rf, double theta_b);
double doa_variance(const Eigen::Matrix2d& qcrb, const std::array<bool, 2>& diverged, double theta_rf,
                    double theta_b);

// Bound for a single cell whose Fisher information is limited both by the
// readout SNR and by the projection-noise ceiling nu n_atoms F_exact:
//   F_eff,i = (1 / (4 sigma^2 SNR) + 1 / (nu n_atoms F_i))^-1.
struct SnrLimitedModel {
  Eigen::Matrix2d qfim_exact = Eigen::Matrix2d::Zero();  // single-atom
  double nu = 1.0;
  double n_atoms = 1.0;
  double sigma_total_sq = 1.0;
};

std::array<double, 2> effective_fisher(const SnrLimitedModel& model, double snr);
double doa_variance_snr(const SnrLimitedModel& model, double snr, double theta_rf, double theta_b);

// ---------------------------------------------------------------------------
// Classical arrays

enum class ArrayKind { ULA, VSA };

struct ArrayModel {
  int n_elements = 16;
  double wavelength = 1.0;  // m
  double spacing = 0.5;     // m
  ArrayKind kind = ArrayKind::ULA;

  double wavenumber() const;
  void validate() const;
  static ArrayModel half_wavelength(int n, double wavelength, ArrayKind kind = ArrayKind::ULA);
};

// (2 SNR k^2 d^2 cos^2 theta sum n^2)^-1, +inf at endfire.
double crb_ula(const ArrayModel& model, double snr, double theta);

// [2 SNR Re{da^H Xi da}]^-1 with Xi the projector orthogonal to a.
double crb_vsa(double snr, const Eigen::VectorXcd& steering, const Eigen::VectorXcd& steering_deriv);

struct Steering {
  Eigen::VectorXcd a;
  Eigen::VectorXcd da;
};

// Tri-axial electric-dipole triplets on a line along y; the wave arrives in
// the x-y plane at angle theta from broadside with E in that plane, so each
// triplet sees exp(i k d n sin theta) (-sin theta, cos theta, 0).
Steering vsa_steering(const ArrayModel& model, double theta);
double crb_vsa(const ArrayModel& model, double snr, double theta);

double array_crb(const ArrayModel& model, double snr, double theta);

}  // namespace rydoa::estimation
