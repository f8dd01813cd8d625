#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqfdr/core.hpp"
#include "seqfdr/kernels.hpp"

namespace seqfdr {

enum class Family { Bernoulli, Poisson, ConditionalBinomial };

std::string to_string(Family f);
Family parse_family(const std::string& name);

/// One time step of one data stream. `trials` is only meaningful for the
/// conditional-binomial family (count successes out of `trials`).
struct Observation {
  std::int64_t count = 0;
  std::int64_t trials = 0;
};

/// Simple null vs. simple alternative on one parameter.
class SimpleModel {
 public:
  SimpleModel(Family family, double null_param, double alt_param);

  Family family() const noexcept { return family_; }
  double null_param() const noexcept { return null_; }
  double alt_param() const noexcept { return alt_; }

  /// log(g(x)/h(x)) for one observation. Throws DomainError off-support.
  double llr_increment(const Observation& obs) const;

  /// Cumulative statistic from sufficient statistics after `steps` steps.
  /// Algebraically the sum of the per-step increments; computing it from
  /// totals makes equal histories map to bit-identical values.
  double llr_from_totals(std::int64_t count_total, std::int64_t trials_total,
                         std::int64_t steps) const;

  /// Weights for the batched path kernel (Bernoulli and Poisson).
  kernels::LlrWeights weights() const noexcept { return w_; }

  friend bool operator==(const SimpleModel& a, const SimpleModel& b) {
    return a.family_ == b.family_ && a.null_ == b.null_ && a.alt_ == b.alt_;
  }

 private:
  Family family_;
  double null_;
  double alt_;
  kernels::LlrWeights w_;
};

/// Variant of the SPRT boundary formulas.
enum class BoundaryRule {
  Wald,          ///< log(beta/(1-alpha)) + rho, log((1-beta)/alpha) - rho
  Conservative,  ///< log(beta), log(1/alpha)
};

struct WaldOptions {
  double rho = 0.583;
  BoundaryRule rule = BoundaryRule::Wald;
};

/// Lower/upper SPRT critical values for a single test with errors (alpha, beta).
std::pair<double, double> wald_bounds(double alpha, double beta, double rho);
std::pair<double, double> sprt_bounds(double alpha, double beta, const WaldOptions& opts);

struct SurrogateErrors {
  std::vector<double> alpha_tilde;
  std::vector<double> beta_tilde;
};

/// alpha~_k = alpha_1 (1-beta_k)/(1-beta_1), beta~_k = beta_1 (1-alpha_k)/(1-alpha_1).
SurrogateErrors surrogate_errors(const StepVector& alpha, const StepVector& beta);

/// Per-stream raw boundaries in log-likelihood units, level k = 1..J.
struct CriticalMatrix {
  std::vector<double> A;  // lower, nondecreasing in k
  std::vector<double> B;  // upper, nonincreasing in k
  std::size_t size() const noexcept { return A.size(); }
};

/// A_k = A(alpha~_k, beta_k), B_k = B(alpha_k, beta~_k). Throws NumericalError
/// naming the level if the resulting ladder is not ordered.
CriticalMatrix stepdown_critical_values(const StepVector& alpha, const StepVector& beta,
                                        double rho);
CriticalMatrix stepdown_critical_values(const StepVector& alpha, const StepVector& beta,
                                        const WaldOptions& opts);

/// Checks A_1 <= ... <= A_J <= B_J <= ... <= B_1; returns the first failing
/// level (1-based) or nullopt.
std::optional<std::size_t> first_ladder_violation(const CriticalMatrix& crit);

/// Common-scale target knots: a_1..a_J (nondecreasing), b_1..b_J (nonincreasing).
struct StandardKnots {
  std::vector<double> a;
  std::vector<double> b;
};

/// Increasing piecewise-linear map sending each raw knot to its standard
/// knot, extended with slope 1 past the extreme knots.
class Standardizer {
 public:
  /// `raw` and `standard` strictly increasing and of equal length >= 1.
  /// `a`/`b` are the standardized boundaries the map was built for.
  Standardizer(std::vector<double> raw, std::vector<double> standard, std::vector<double> a,
               std::vector<double> b);

  double operator()(double x) const;

  const std::vector<double>& raw_knots() const noexcept { return raw_; }
  const std::vector<double>& standard_knots() const noexcept { return std_; }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }

 private:
  std::vector<double> raw_;
  std::vector<double> std_;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Integer grid a_k = k - J - 1, b_k = J - k + 1, with tied raw boundaries
/// sharing one target (the grid is compacted toward zero).
StandardKnots default_knots(const CriticalMatrix& crit);

Standardizer make_standardizer(const CriticalMatrix& crit,
                               const std::optional<StandardKnots>& targets = std::nullopt);

/// Upper-only variant for rejective procedures: maps B_k to b_k.
Standardizer make_upper_standardizer(const std::vector<double>& B,
                                     const std::optional<std::vector<double>>& targets = std::nullopt);

}  // namespace seqfdr
