#include "seqfdr/sprt.hpp"

#include <algorithm>
#include <cmath>

#include "seqfdr/error.hpp"

namespace seqfdr {

std::string to_string(Family f) {
  switch (f) {
    case Family::Bernoulli: return "bernoulli";
    case Family::Poisson: return "poisson";
    case Family::ConditionalBinomial: return "conditional_binomial";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "bernoulli" || name == "binomial") return Family::Bernoulli;
  if (name == "poisson") return Family::Poisson;
  if (name == "conditional_binomial") return Family::ConditionalBinomial;
  throw DomainError("unknown family '" + name + "'");
}

SimpleModel::SimpleModel(Family family, double null_param, double alt_param)
    : family_(family), null_(null_param), alt_(alt_param) {
  switch (family_) {
    case Family::Bernoulli:
    case Family::ConditionalBinomial:
      if (!(0.0 < null_ && null_ < alt_ && alt_ < 1.0))
        throw DomainError("binomial model needs 0 < p_H < p_G < 1");
      w_.success = std::log(alt_ / null_);
      w_.failure = std::log((1.0 - alt_) / (1.0 - null_));
      w_.per_step = 0.0;
      break;
    case Family::Poisson:
      if (!(0.0 < null_ && null_ < alt_)) throw DomainError("Poisson model needs 0 < lambda_H < lambda_G");
      w_.success = std::log(alt_ / null_);
      w_.failure = 0.0;
      w_.per_step = -(alt_ - null_);
      break;
  }
}

double SimpleModel::llr_increment(const Observation& obs) const {
  switch (family_) {
    case Family::Bernoulli:
      if (obs.count != 0 && obs.count != 1) throw DomainError("Bernoulli observation must be 0 or 1");
      return obs.count == 1 ? w_.success : w_.failure;
    case Family::Poisson:
      if (obs.count < 0) throw DomainError("Poisson observation must be nonnegative");
      return static_cast<double>(obs.count) * w_.success + w_.per_step;
    case Family::ConditionalBinomial:
      if (obs.count < 0 || obs.trials < obs.count)
        throw DomainError("conditional binomial observation needs 0 <= k <= n");
      return static_cast<double>(obs.count) * w_.success +
             static_cast<double>(obs.trials - obs.count) * w_.failure;
  }
  return 0.0;
}

double SimpleModel::llr_from_totals(std::int64_t count_total, std::int64_t trials_total,
                                    std::int64_t steps) const {
  const double s = static_cast<double>(count_total);
  const double n = static_cast<double>(steps);
  if (family_ == Family::ConditionalBinomial)
    return s * w_.success + (static_cast<double>(trials_total) - s) * w_.failure;
  // Same evaluation order as kernels::advance_paths.
  return (s * w_.success + (n - s) * w_.failure) + n * w_.per_step;
}

std::pair<double, double> wald_bounds(double alpha, double beta, double rho) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw DomainError("SPRT error probabilities must lie in (0, 1)");
  if (alpha + beta > 1.0) throw DomainError("SPRT needs alpha + beta <= 1");
  if (rho < 0.0) throw DomainError("overshoot correction rho must be >= 0");
  return {std::log(beta / (1.0 - alpha)) + rho, std::log((1.0 - beta) / alpha) - rho};
}

std::pair<double, double> sprt_bounds(double alpha, double beta, const WaldOptions& opts) {
  if (opts.rule == BoundaryRule::Wald) return wald_bounds(alpha, beta, opts.rho);
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw DomainError("SPRT error probabilities must lie in (0, 1)");
  if (alpha + beta > 1.0) throw DomainError("SPRT needs alpha + beta <= 1");
  return {std::log(beta), -std::log(alpha)};
}

SurrogateErrors surrogate_errors(const StepVector& alpha, const StepVector& beta) {
  if (alpha.size() != beta.size()) throw DomainError("alpha and beta must have the same length");
  const double a1 = alpha[0];
  const double b1 = beta[0];
  if (a1 >= 1.0 || b1 >= 1.0) throw DomainError("alpha_1 and beta_1 must be below 1");
  SurrogateErrors out;
  out.alpha_tilde.resize(alpha.size());
  out.beta_tilde.resize(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out.alpha_tilde[k] = k == 0 ? a1 : a1 * (1.0 - beta[k]) / (1.0 - b1);
    out.beta_tilde[k] = k == 0 ? b1 : b1 * (1.0 - alpha[k]) / (1.0 - a1);
  }
  return out;
}

std::optional<std::size_t> first_ladder_violation(const CriticalMatrix& crit) {
  const std::size_t J = crit.size();
  for (std::size_t k = 1; k < J; ++k) {
    if (crit.A[k] < crit.A[k - 1]) return k + 1;
    if (crit.B[k] > crit.B[k - 1]) return k + 1;
  }
  if (J > 0 && crit.A[J - 1] > crit.B[J - 1]) return J;
  return std::nullopt;
}

CriticalMatrix stepdown_critical_values(const StepVector& alpha, const StepVector& beta,
                                        const WaldOptions& opts) {
  const SurrogateErrors s = surrogate_errors(alpha, beta);
  const std::size_t J = alpha.size();
  CriticalMatrix crit;
  crit.A.resize(J);
  crit.B.resize(J);
  for (std::size_t k = 0; k < J; ++k) {
    crit.A[k] = sprt_bounds(s.alpha_tilde[k], beta[k], opts).first;
    crit.B[k] = sprt_bounds(alpha[k], s.beta_tilde[k], opts).second;
  }
  if (auto bad = first_ladder_violation(crit))
    throw NumericalError("boundary collapse at level " + std::to_string(*bad) +
                         ": critical values are not ordered (overshoot correction too large?)");
  return crit;
}

CriticalMatrix stepdown_critical_values(const StepVector& alpha, const StepVector& beta,
                                        double rho) {
  return stepdown_critical_values(alpha, beta, WaldOptions{rho, BoundaryRule::Wald});
}

Standardizer::Standardizer(std::vector<double> raw, std::vector<double> standard,
                           std::vector<double> a, std::vector<double> b)
    : raw_(std::move(raw)), std_(std::move(standard)), a_(std::move(a)), b_(std::move(b)) {
  if (raw_.empty() || raw_.size() != std_.size())
    throw DomainError("standardizer needs matching, nonempty knot lists");
  for (std::size_t i = 1; i < raw_.size(); ++i) {
    if (!(raw_[i] > raw_[i - 1]) || !(std_[i] > std_[i - 1]))
      throw DomainError("standardizer knots must be strictly increasing");
  }
}

double Standardizer::operator()(double x) const {
  // Segment whose left knot is the largest raw knot <= x.
  const auto it = std::upper_bound(raw_.begin(), raw_.end(), x);
  if (it == raw_.begin()) return std_.front() + (x - raw_.front());
  const std::size_t i = static_cast<std::size_t>(it - raw_.begin()) - 1;
  if (i + 1 == raw_.size()) return std_.back() + (x - raw_.back());
  const double t = (x - raw_[i]) / (raw_[i + 1] - raw_[i]);
  const double y = std_[i] + t * (std_[i + 1] - std_[i]);
  // Keep the map strictly below the next knot so crossing events are preserved.
  return std::min(y, std::nextafter(std_[i + 1], std_[i]));
}

StandardKnots default_knots(const CriticalMatrix& crit) {
  const std::size_t J = crit.size();
  StandardKnots t;
  t.a.resize(J);
  t.b.resize(J);
  const bool touching = crit.A[J - 1] == crit.B[J - 1];
  t.a[J - 1] = touching ? 0.0 : -1.0;
  t.b[J - 1] = touching ? 0.0 : 1.0;
  for (std::size_t k = J - 1; k-- > 0;) {
    t.a[k] = t.a[k + 1] - (crit.A[k] < crit.A[k + 1] ? 1.0 : 0.0);
    t.b[k] = t.b[k + 1] + (crit.B[k] > crit.B[k + 1] ? 1.0 : 0.0);
  }
  return t;
}

namespace {

// Merge (raw, target) pairs sorted by raw, collapsing exact raw duplicates.
Standardizer build(std::vector<std::pair<double, double>> pairs, std::vector<double> a,
                   std::vector<double> b) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<double> raw;
  std::vector<double> standard;
  for (const auto& [x, y] : pairs) {
    if (!raw.empty() && raw.back() == x) {
      if (standard.back() != y)
        throw DomainError("tied raw critical values must share one standardized target");
      continue;
    }
    if (!standard.empty() && !(y > standard.back()))
      throw DomainError("standardized targets must increase with the raw critical values");
    raw.push_back(x);
    standard.push_back(y);
  }
  return Standardizer(std::move(raw), std::move(standard), std::move(a), std::move(b));
}

}  // namespace

Standardizer make_standardizer(const CriticalMatrix& crit,
                               const std::optional<StandardKnots>& targets) {
  const std::size_t J = crit.size();
  if (J == 0 || crit.B.size() != J) throw DomainError("critical matrix is empty or ragged");
  if (first_ladder_violation(crit)) throw DomainError("critical matrix is not ordered");
  StandardKnots t = targets ? *targets : default_knots(crit);
  if (t.a.size() != J || t.b.size() != J) throw DomainError("target knots must have J entries");
  for (std::size_t k = 1; k < J; ++k) {
    if (t.a[k] < t.a[k - 1]) throw DomainError("target a_k must be nondecreasing");
    if (t.b[k] > t.b[k - 1]) throw DomainError("target b_k must be nonincreasing");
  }
  if (t.a[J - 1] > t.b[J - 1]) throw DomainError("target a_J must not exceed b_J");

  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(2 * J);
  for (std::size_t k = 0; k < J; ++k) pairs.emplace_back(crit.A[k], t.a[k]);
  for (std::size_t k = J; k-- > 0;) pairs.emplace_back(crit.B[k], t.b[k]);
  return build(std::move(pairs), t.a, t.b);
}

Standardizer make_upper_standardizer(const std::vector<double>& B,
                                     const std::optional<std::vector<double>>& targets) {
  const std::size_t J = B.size();
  if (J == 0) throw DomainError("no critical values");
  for (std::size_t k = 1; k < J; ++k)
    if (B[k] > B[k - 1]) throw DomainError("upper critical values must be nonincreasing");
  std::vector<double> b(J);
  if (targets) {
    if (targets->size() != J) throw DomainError("target knots must have J entries");
    b = *targets;
  } else {
    b[J - 1] = 1.0;
    for (std::size_t k = J - 1; k-- > 0;) b[k] = b[k + 1] + (B[k] > B[k + 1] ? 1.0 : 0.0);
  }
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t k = J; k-- > 0;) pairs.emplace_back(B[k], b[k]);
  return build(std::move(pairs), {}, b);
}

}  // namespace seqfdr
