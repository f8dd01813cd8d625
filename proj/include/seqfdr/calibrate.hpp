#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "seqfdr/core.hpp"
#include "seqfdr/rng.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

/// Running maxima max_{n <= n_bar} Lambda(n) of `reps` independent paths of
/// the LLR statistic when the data follow parameter `theta`. Paths are
/// simulated in fixed blocks, each with its own generator, so the output does
/// not depend on `workers`.
std::vector<double> simulate_path_maxima(const SimpleModel& model, double theta,
                                         std::int64_t n_bar, std::size_t reps, std::uint64_t seed,
                                         StreamPurpose purpose, unsigned workers = 0);

struct CalibrationReport {
  Family family = Family::Bernoulli;
  double null_param = 0.0;
  double alt_param = 0.0;
  std::vector<double> alpha;
  std::int64_t n_bar = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<double> B;  // nonincreasing, LLR units
  std::size_t validation_reps = 0;
  std::vector<double> achieved;  // fresh-sample P(max Lambda >= B_k)
};

/// Upper critical values for the truncated rejective procedure: B_k is the
/// ceil((reps+1)(1-alpha_k))-th smallest null maximum, nudged up one ulp so
/// that crossing requires strictly exceeding it. Validated on a fresh sample of
/// `validation_reps` paths (0 means reps).
CalibrationReport mc_truncated_critical_values(const SimpleModel& model, const StepVector& alpha,
                                               std::int64_t n_bar, std::size_t reps,
                                               std::uint64_t seed, unsigned workers = 0,
                                               std::size_t validation_reps = 0);

nlohmann::json to_json(const CalibrationReport& r);
CalibrationReport calibration_from_json(const nlohmann::json& j);

/// Raw-scale boundaries for gamma estimation.
struct OpenBoundaries {
  CriticalMatrix crit;
};
struct TruncatedBoundaries {
  std::vector<double> B;
  std::int64_t n_bar = 0;
};
using GammaBoundaries = std::variant<OpenBoundaries, TruncatedBoundaries>;

struct GammaEstimate {
  double gamma1 = 0.0;
  std::optional<double> gamma2;  // open-ended only
  std::vector<double> per_stream1, per_stream2;
  std::vector<double> se1, se2;
  std::vector<double> theta;
  std::size_t reps = 0;
};

/// gamma_1j = P(Lambda_j reaches B_1 before A_J), or P(max_{n<=n_bar} Lambda_j
/// >= B_1) when truncated; gamma_2j = P(reaches A_1 before B_J). Streams with
/// the same model and theta share one simulation.
GammaEstimate estimate_gamma(const std::vector<SimpleModel>& models,
                             const std::vector<double>& theta, const GammaBoundaries& bounds,
                             std::size_t reps, std::uint64_t seed, unsigned workers = 0,
                             std::int64_t max_steps = 100000);

struct GammaFixedPoint {
  double gamma = 1.0;
  std::vector<double> history;  // estimates, one per iteration
  std::size_t iterations = 0;
};

/// Smallest-effort valid gamma: start from 1 and replace gamma by the
/// estimate made with boundaries built from gamma, until the estimate is at
/// least gamma. `estimate(gamma)` must be monotone in gamma up to MC noise.
/// Throws NumericalError if gamma falls below `floor`.
GammaFixedPoint gamma_fixed_point(const std::function<double(double)>& estimate,
                                  double floor = 1e-3, std::size_t max_iter = 60);

}  // namespace seqfdr
