#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydoa/fields.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::reconstruction {

/// Polarization angle recovered from the pi / sigma weight balance of an E1
/// spectrum. Only |theta| mod pi is observable from weights, so every
/// candidate branch is kept.
struct ThetaRfEstimate {
  double theta = 0.0;                 // principal value in [0, pi/2]
  std::array<double, 4> candidates{}; // theta, -theta, pi - theta, pi + theta (wrapped to (-pi, pi])
  double pi_weight = 0.0;             // |alpha_0|^2 up to a common scale
  double sigma_plus_weight = 0.0;
  double sigma_minus_weight = 0.0;
  double sigma_asymmetry = 0.0;       // (W+ - W-) / (W+ + W-)
  bool sign_resolved = false;
  std::string evidence;
};

ThetaRfEstimate estimate_theta_rf(const spectroscopy::EitSpectrum& spec);

/// Bias orientations for the two-step magnetic scan, with the sign of the
/// (v, n, u) projections of B_RF on each orientation's real triad, ordered
/// like q = -1, 0, +1.
struct BiasScanPlan {
  std::vector<Eigen::Vector3d> orientations;
  std::vector<std::array<int, 3>> sign_factors;

  static BiasScanPlan default_plan();  // z then y, all signs +1
  void validate() const;
};

// Signs a perfectly informed operator would assign for a known B_RF.
std::vector<std::array<int, 3>> sign_factors_for(const BiasScanPlan& plan, const Eigen::Vector3d& b_rf);

// Amplitudes |e_q^dagger . B_RF| per orientation, q = -1, 0, +1.
using AmplitudeTriple = std::array<double, 3>;

std::vector<AmplitudeTriple> forward_amplitudes(const BiasScanPlan& plan, const Eigen::Vector3d& b_rf);

struct BSolve {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  double residual = 0.0;      // rms over all amplitude equations, T
  int sign_matches = 0;       // sign factors honoured by the chosen root
  bool consistent = true;     // residual within tolerance of the data scale
  std::vector<std::string> warnings;
};

BSolve solve_b_rf(const BiasScanPlan& plan, std::span<const AmplitudeTriple> measured);

struct DoaEstimate {
  double theta_rf_hat = 0.0;
  double theta_b_hat = 0.0;
  Eigen::Vector3d e_vec = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_rf_vector = Eigen::Vector3d::Zero();
  Eigen::Vector3d k_hat = Eigen::Vector3d::UnitX();
  double theta_doa = 0.0;
};

DoaEstimate compose_doa(const Eigen::Vector3d& e_vec, const Eigen::Vector3d& b_vec);

// Ground-truth arrival angle of a plane wave.
double true_doa(const fields::PlaneWave& scene);

struct CycleConfigs {
  spectroscopy::LadderConfig e1;
  spectroscopy::LadderConfig m1;
};

// Optional response perturbation, called once per recorded spectrum with a
// stage tag ("e1" or "m1:<i>").
using ResponseHook = std::function<void(const std::string& stage, std::vector<double>& response)>;

struct CycleResult {
  DoaEstimate estimate;
  ThetaRfEstimate theta_rf;
  BSolve b_solve;
  spectroscopy::EitSpectrum e1_spectrum;
  std::vector<spectroscopy::EitSpectrum> m1_spectra;
  std::vector<AmplitudeTriple> m1_amplitudes;
};

// E1 stage at the given bias, then one M1 stage per plan orientation with the
// same bias magnitude along that orientation.
CycleResult full_cycle(const fields::PlaneWave& scene, const fields::BiasField& bias, const CycleConfigs& cfgs,
                       const BiasScanPlan& plan, const std::vector<double>& grid, const ResponseHook& hook = {});

// Amplitudes |B_q| from fitted M1 strengths.
AmplitudeTriple amplitudes_from_strengths(const spectroscopy::LadderConfig& m1,
                                          const spectroscopy::EitSpectrum& spec);

}  // namespace rydoa::reconstruction
