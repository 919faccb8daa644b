#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rydoa/config.hpp"
#include "rydoa/estimation.hpp"
#include "rydoa/reconstruction.hpp"
#include "rydoa/spectroscopy.hpp"

namespace rydoa::scenario {

inline constexpr const char* version = "0.1.0";

using spectroscopy::Exec;

enum class Variable { theta_rf, theta_bias, e0, b_bias, snr, n_elements, distance, n_atoms };

const char* to_string(Variable v);
Variable parse_variable(const std::string& name);
// Column name with display unit, e.g. "theta_rf_deg".
std::string column_name(Variable v);

struct SweepAxis {
  Variable variable = Variable::theta_rf;
  double start = 0.0;  // display units (deg, V/m, mT, linear, count, m)
  double stop = 0.0;
  int steps = 2;
  bool log = false;

  std::vector<double> values() const;
  void validate() const;
};

// "start:stop:steps"
SweepAxis parse_axis(Variable v, const std::string& range, bool log);

struct SweepSpec {
  SweepAxis primary;
  std::optional<SweepAxis> secondary;
};

// Sets a swept quantity (display units) on a copy of the config.
config::ScenarioConfig with_value(config::ScenarioConfig cfg, Variable v, double value);

struct Provenance {
  std::string command;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void write_header(std::ostream& out, const Provenance& p);

// Fixed, locale-independent number formatting; non-finite values print as inf.
std::string fmt(double x);

// ---------------------------------------------------------------------------
// spectrum

spectroscopy::EitSpectrum run_spectrum(const config::ScenarioConfig& cfg, spectroscopy::TransitionKind kind,
                                       spectroscopy::ResponseModel model = spectroscopy::ResponseModel::analytic,
                                       spectroscopy::Exec exec = spectroscopy::Exec::parallel);
void write_spectrum_csv(std::ostream& out, const spectroscopy::EitSpectrum& spec);
void write_peaks_csv(std::ostream& out, const spectroscopy::EitSpectrum& spec);

// ---------------------------------------------------------------------------
// qcrb-sweep

struct QcrbRow {
  std::vector<double> x;  // swept values, display units
  estimation::FisherResult fisher;
  std::string status = "ok";  // error kind when the point failed
};

std::vector<QcrbRow> qcrb_sweep(const config::ScenarioConfig& cfg, const SweepSpec& spec, Exec exec = Exec::parallel);
void write_qcrb_csv(std::ostream& out, const SweepSpec& spec, const std::vector<QcrbRow>& rows);

// ---------------------------------------------------------------------------
// compare

struct CompareRow {
  double x = 0.0;
  double snr_array = 0.0;
  double snr_rydberg = 0.0;
  double rydberg_lo_free = 0.0;     // DoA variance, rad^2
  double rydberg_lo_dressed = 0.0;
  double rydberg_lo_free_theta_rf = 0.0;     // theta_rf alone, rad^2
  double rydberg_lo_dressed_theta_rf = 0.0;
  double ula = 0.0;
  double vsa = 0.0;
};

struct CompareResult {
  estimation::FisherResult fisher;  // single-cell reference at the scenario point
  std::vector<CompareRow> rows;
};

CompareResult compare_sweep(const config::ScenarioConfig& cfg, const SweepAxis& axis);
void write_compare_csv(std::ostream& out, const SweepAxis& axis, const CompareResult& result);

// ---------------------------------------------------------------------------
// doa

// Per-point standard deviation of projection noise on Im rho_21 when the
// nu * n_atoms shots are spread evenly over the grid. Uses the worst-case
// single-shot variance 1/4: the weak-probe response can exceed the physical
// bound |Im rho_21| <= 1/2 under a strong probe, where 1/4 - y^2 would
// silently switch the noise off.
std::vector<double> projection_noise_sigma(const std::vector<double>& response, double shots);

struct MonteCarloStats {
  int trials = 0;
  int failures = 0;
  double doa_mean = 0.0;   // error mean, rad
  double doa_var = 0.0;    // sample variance, rad^2
  double theta_rf_mean = 0.0;
  double theta_rf_var = 0.0;
};

MonteCarloStats monte_carlo(const config::ScenarioConfig& cfg, int trials, std::uint64_t seed,
                            Exec exec = Exec::parallel);

nlohmann::ordered_json run_doa(const config::ScenarioConfig& cfg, std::uint64_t seed, Exec exec = Exec::parallel);

// JSON number, or the string "inf" for non-finite values.
nlohmann::ordered_json json_number(double x);

}  // namespace rydoa::scenario
