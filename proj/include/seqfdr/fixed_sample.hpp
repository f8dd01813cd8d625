#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqfdr/core.hpp"
#include "seqfdr/datagen.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

/// Upper-tail p-value of `total` after n observations under the null:
/// P(Bin(n, p_H) >= total) or P(Pois(n lambda_H) >= total).
double exact_pvalue(const SimpleModel& model, std::int64_t n, std::int64_t total);

/// Step-up rule: rejects the k* smallest p-values, k* = max{k : p_(k) <= alpha_k}.
/// Returned indices are ordered by (p-value, index).
std::vector<std::size_t> bh_stepup(std::span<const double> pvalues, const StepVector& alpha);

enum class FssScaling {
  Plain,     ///< alpha = bh_steps(q1, J)
  DScaled,   ///< alpha = scale_for_fdr(bh_steps(q1, J), q1)
};

struct FssConfig {
  Family family = Family::Bernoulli;
  double null_param = 0.05;
  double alt_param = 0.15;
  std::size_t J = 10;
  std::size_t m0 = 0;
  double copula_rho = -0.6;
  double q1 = 0.25;
  double target_fnr = 0.1;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  std::int64_t n_max = 1000;
  FssScaling scaling = FssScaling::DScaled;
  unsigned workers = 0;
};

struct FssEstimate {
  double fnr = 0.0, fnr_se = 0.0;
  double fdr = 0.0, fdr_se = 0.0;
};

struct FssSearchResult {
  std::int64_t n_fss = 0;
  bool found = false;
  double achieved_fnr = 0.0, achieved_fnr_se = 0.0;
  double achieved_fdr = 0.0;
  double target_fnr = 0.0;
  std::size_t reps = 0;
  std::size_t confirm_reps = 0;
  /// Confirmation estimate within 1.5 standard errors of the target.
  bool within_tolerance = false;
  std::vector<std::pair<std::int64_t, double>> probes;  // (N, estimated FNR)
};

/// FNR/FDR of the fixed-sample comparator at sample size n. Replicate r
/// always uses the same random numbers, so estimates at different n are
/// coupled.
FssEstimate evaluate_fixed_sample(const FssConfig& cfg, std::int64_t n, std::size_t reps,
                                  StreamPurpose purpose);

/// Binary search for the smallest n whose estimated FNR is at most the target,
/// followed by a confirmation run at 4x reps on fresh random numbers.
FssSearchResult find_matching_fss(const FssConfig& cfg);

}  // namespace seqfdr
