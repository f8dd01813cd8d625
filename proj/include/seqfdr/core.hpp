#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace seqfdr {

/// Nondecreasing per-level error allotments 0 < v_1 <= ... <= v_J <= 1, J >= 2.
class StepVector {
 public:
  /// Throws DomainError if the values violate the invariant.
  explicit StepVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  /// 1-based access, matching the level index k.
  double at(std::size_t k) const { return values_.at(k - 1); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double max() const noexcept { return values_.back(); }

  /// Entrywise multiple c * v. The result must again be a valid StepVector.
  StepVector scaled(double c) const;

  friend bool operator==(const StepVector&, const StepVector&) = default;

 private:
  std::vector<double> values_;
};

struct BoundResult {
  double value = 0.0;        // max over m of D(alpha, m)
  std::size_t argmax_m = 0;  // smallest maximizer
  std::vector<double> per_m;  // D(alpha, m) for m = 0..J
};

/// Upper bound on the error rate of a step-down procedure with step values
/// alpha when m of the J hypotheses are true (alpha_0 taken as 0).
double d_bound_at(const StepVector& alpha, std::size_t m);

/// Maximum of d_bound_at over m = 0..J.
BoundResult d_bound(const StepVector& alpha);

/// alpha_j = q j / J.
StepVector bh_steps(double q, std::size_t J);

/// alpha_j = 1 - (1 - min(1, qJ/(J-j+1)))^(1/(J-j+1)).
StepVector bl_steps(double q, std::size_t J);

/// q * alpha / D(alpha); the result has D equal to q.
StepVector scale_for_fdr(const StepVector& alpha, double q);

/// q * gamma * alpha / D(alpha), for pFDR/pFNR control given a lower bound
/// gamma on the probability of at least one rejection (acceptance).
StepVector scale_for_pfdr(const StepVector& alpha, double q, double gamma);

}  // namespace seqfdr
