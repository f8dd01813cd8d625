#pragma once

// End-to-end simulation of the step-down procedures on copula data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqfdr/calibrate.hpp"
#include "seqfdr/core.hpp"
#include "seqfdr/procedures.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

enum class Mode { Open, Rejective };
enum class StepScheme { BH, BL };
/// Which guarantee the step values are scaled for.
enum class Control { FDR, PFDR };

struct SimulationConfig {
  Family family = Family::Bernoulli;
  double null_param = 0.05;
  double alt_param = 0.15;
  std::size_t J = 10;
  std::size_t m0 = 0;
  double copula_rho = -0.6;
  double q1 = 0.25;
  double q2 = 0.15;
  Mode mode = Mode::Open;
  StepScheme scheme = StepScheme::BH;
  Control control = Control::FDR;
  /// Use the raw scheme values instead of scaling them by q / D.
  bool unscaled = false;
  WaldOptions wald{};
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::int64_t n_bar = 50;            // rejective only
  std::size_t calibration_reps = 20000;  // rejective only
  std::size_t gamma_reps = 20000;     // pFDR only
  std::int64_t max_steps = 100000;    // open-ended guard
  unsigned workers = 0;
};

struct SimulationOutput {
  MetricsSummary metrics;
  std::vector<TrialResult> trials;
  std::vector<Truth> truth;
  std::vector<double> alpha, beta;
  std::optional<CriticalMatrix> crit;            // open-ended
  std::optional<CalibrationReport> calibration;  // rejective
  std::optional<GammaFixedPoint> gamma;          // pFDR
  std::vector<double> a, b;                      // standardized boundaries
};

StepVector scheme_steps(StepScheme scheme, double q, std::size_t J);

void validate(const SimulationConfig& cfg);

SimulationOutput run_simulation(const SimulationConfig& cfg);

std::string to_string(Mode m);
std::string to_string(StepScheme s);
std::string to_string(Control c);

}  // namespace seqfdr
