#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydoa/angular.hpp"
#include "rydoa/fields.hpp"

namespace rydoa::spectroscopy {

using cplx = std::complex<double>;

enum class TransitionKind { E1, M1 };

const char* to_string(TransitionKind kind);

/// Parameters of the probe / coupling / RF ladder. Rates and detunings are
/// angular frequencies (rad/s).
struct LadderConfig {
  TransitionKind kind = TransitionKind::E1;

  double omega_p = 0.0;
  double omega_c = 0.0;
  double delta_p = 0.0;
  double delta_c = 0.0;

  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double gamma4 = 0.0;
  double gamma21 = 0.0;
  double gamma31 = 0.0;
  double gamma_rf = 0.0;

  double omega0 = 0.0;
  double delta_tilde = 0.0;
  int delta_tilde_sign = +1;  // omega_rf = omega0 + sign * delta_tilde

  double reduced_element = 0.0;  // C m for E1, J/T for M1
  double g_lower = 0.0;
  double g_upper = 0.0;
  angular::HalfInt j_lower = angular::HalfInt::half(1);
  angular::HalfInt j_upper = angular::HalfInt::half(1);

  double omega_rf() const { return omega0 + delta_tilde_sign * delta_tilde; }
  double delta_rf() const { return delta_tilde_sign * delta_tilde; }

  // Sets gamma21 = gamma2 / 2 and gamma31 = gamma3 / 2.
  LadderConfig& derive_coherence_rates();

  void validate() const;
};

struct TransitionPath {
  int q = 0;
  angular::HalfInt m_lower;
  angular::HalfInt m_upper;
  double three_j = 0.0;
  double rabi = 0.0;      // rad/s, non-negative
  double zeeman = 0.0;    // rad/s
  double detuning = 0.0;  // omega_rf - (omega0 + zeeman)

  bool is_pi() const { return q == 0; }
  std::string label() const;
};

struct PathOptions {
  // Keep paths whose polarization coefficient vanishes (rabi = 0). Used when
  // the level structure must not depend on the field angle.
  bool include_dark = false;
};

// Zeeman shifts use the bias projection B cos(theta_bias).
std::vector<TransitionPath> enumerate_paths(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                                            const fields::BiasField& bias, PathOptions opts = {});
// Zeeman shifts use the given field along the quantization axis.
std::vector<TransitionPath> enumerate_paths(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                                            double field_along_axis, PathOptions opts = {});

// Sum over paths of rabi^2 / (detuning + offset + i gamma_rf). `offset` is the
// optical two-photon detuning (delta_p + delta_c) seen by the RF pole; zero
// reproduces the fixed self-energy.
cplx self_energy(std::span<const TransitionPath> paths, double gamma_rf, double offset = 0.0);

// Probe coherence rho_21 for a given self-energy and coupling detuning.
// Sign convention: Im(rho_21) > 0 is absorption.
cplx rho21_analytic(const LadderConfig& cfg, cplx sigma, double delta_c);

// Coupling-detuning response with the self-energy evaluated at the matching
// multi-photon detuning, so that the RF resonances move with delta_c.
cplx rho21_sweep_point(const LadderConfig& cfg, std::span<const TransitionPath> paths, double delta_c);

/// Steady-state density matrix. Level 0 is the ground state, 1 the optical
/// intermediate state, 2 the lower Rydberg state, and 3 + k the upper
/// Rydberg state reached through path k.
struct DensityMatrix {
  Eigen::MatrixXcd rho;
  double residual = 0.0;  // ||L vec(rho)|| / ||L||_F

  int dim() const { return static_cast<int>(rho.rows()); }
  // rho_21 in the probe-transition labelling (|1> ground, |2> intermediate).
  cplx probe_coherence() const { return rho(0, 1); }
};

struct LadderModel {
  Eigen::MatrixXcd hamiltonian;
  std::vector<Eigen::MatrixXcd> collapse;
};

LadderModel build_ladder(const LadderConfig& cfg, std::span<const TransitionPath> paths);

// Column-stacking Lindblad superoperator.
Eigen::MatrixXcd liouvillian(const LadderModel& model);

DensityMatrix solve_steady_state(const Eigen::MatrixXcd& liouv);

DensityMatrix steady_state(const LadderConfig& cfg, std::span<const TransitionPath> paths);
DensityMatrix steady_state(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           const fields::BiasField& bias);

// ---------------------------------------------------------------------------
// Spectra

enum class Exec { parallel, serial };

struct Peak {
  double center = 0.0;     // rad/s
  double height = 0.0;     // response at the maximum
  double prominence = 0.0; // above the higher of the two bounding minima
  double fwhm = 0.0;       // rad/s, width at half prominence
  double area = 0.0;       // trapezoid between bounding minima, baseline removed
  double strength = 0.0;   // fitted rabi^2 of the labelled path, rad^2/s^2
  std::optional<std::size_t> path;  // index into EitSpectrum::paths
  bool unresolved = false;
};

struct EitSpectrum {
  std::vector<double> detuning_grid;  // rad/s, strictly increasing
  std::vector<double> response;       // Im rho_21
  std::vector<TransitionPath> paths;  // every angularly allowed path
  std::vector<Peak> peaks;
  std::vector<double> path_strength;  // fitted rabi^2 per path
  double fit_residual = 0.0;          // rms of the strength fit
  std::vector<std::string> warnings;
};

std::vector<double> linear_grid(double start, double stop, std::size_t n);
std::vector<double> default_grid();  // +-2 pi 60 MHz, 2001 points

// Adds `points` evenly spaced samples within +-half_width of each center and
// merges them into `grid` (sorted, duplicates removed).
std::vector<double> refine_around(std::span<const double> grid, std::span<const double> centers, double half_width,
                                  std::size_t points);

enum class ResponseModel { analytic, full };

std::vector<double> sweep_response(const LadderConfig& cfg, std::span<const TransitionPath> paths,
                                   std::span<const double> grid, ResponseModel model = ResponseModel::analytic,
                                   Exec exec = Exec::parallel);

// Local maxima with bounding minima, areas, widths.
std::vector<Peak> find_peaks(std::span<const double> grid, std::span<const double> response,
                             double min_prominence);

// Position of the RF pole of a path on the coupling-detuning axis.
double pole_position(const LadderConfig& cfg, const TransitionPath& path);

struct StrengthFit {
  std::vector<double> strength;
  double rms = 0.0;
  int iterations = 0;
};

// Fits per-path rabi^2 (>= 0) of the analytic response to `response`, with
// the pole positions fixed by the path list.
StrengthFit fit_path_strengths(const LadderConfig& cfg, std::span<const TransitionPath> paths,
                               std::span<const double> grid, std::span<const double> response);

// Peak analysis + labelling + strength fit on a measured response.
EitSpectrum analyze_spectrum(const LadderConfig& cfg, std::vector<TransitionPath> paths, std::vector<double> grid,
                             std::vector<double> response);

EitSpectrum sweep_spectrum(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           const fields::BiasField& bias, std::vector<double> grid, Exec exec = Exec::parallel);
EitSpectrum sweep_spectrum(const LadderConfig& cfg, const fields::SphericalDecomposition& decomp,
                           double field_along_axis, std::vector<double> grid, Exec exec = Exec::parallel);

}  // namespace rydoa::spectroscopy
