#include "seqfdr/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqfdr/error.hpp"

namespace seqfdr {

StepVector::StepVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw DomainError("step vector needs J >= 2 entries");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v > 0.0 && v <= 1.0))
      throw DomainError("step value " + std::to_string(i + 1) + " = " + std::to_string(v) +
                        " outside (0, 1]");
    if (i > 0 && v < values_[i - 1])
      throw DomainError("step values must be nondecreasing (level " + std::to_string(i + 1) + ")");
  }
}

StepVector StepVector::scaled(double c) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= c;
  return StepVector(std::move(out));
}

double d_bound_at(const StepVector& alpha, std::size_t m) {
  const std::size_t J = alpha.size();
  if (m > J) throw DomainError("m = " + std::to_string(m) + " exceeds J = " + std::to_string(J));
  if (m == 0) return 0.0;

  auto delta = [&](std::size_t j) { return alpha.at(j) - (j > 1 ? alpha.at(j - 1) : 0.0); };

  double head = 0.0;
  for (std::size_t j = 1; j <= J - m + 1; ++j) head += delta(j) / static_cast<double>(j);
  double tail = 0.0;
  for (std::size_t j = J - m + 2; j <= J; ++j)
    tail += delta(j) / (static_cast<double>(j) * static_cast<double>(j - 1));

  return static_cast<double>(m) * (head + static_cast<double>(J - m) * tail);
}

BoundResult d_bound(const StepVector& alpha) {
  BoundResult out;
  const std::size_t J = alpha.size();
  out.per_m.resize(J + 1);
  for (std::size_t m = 0; m <= J; ++m) {
    out.per_m[m] = d_bound_at(alpha, m);
    if (out.per_m[m] > out.value) {
      out.value = out.per_m[m];
      out.argmax_m = m;
    }
  }
  return out;
}

namespace {
void check_q(double q, std::size_t J) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q = " + std::to_string(q) + " outside (0, 1)");
  if (J < 2) throw DomainError("J must be at least 2");
}
}  // namespace

StepVector bh_steps(double q, std::size_t J) {
  check_q(q, J);
  std::vector<double> v(J);
  for (std::size_t j = 1; j <= J; ++j) v[j - 1] = q * static_cast<double>(j) / static_cast<double>(J);
  return StepVector(std::move(v));
}

StepVector bl_steps(double q, std::size_t J) {
  check_q(q, J);
  std::vector<double> v(J);
  for (std::size_t j = 1; j <= J; ++j) {
    const double width = static_cast<double>(J - j + 1);
    const double inner = std::min(1.0, q * static_cast<double>(J) / width);
    // 1 - (1 - x)^(1/w), evaluated without cancellation for small x.
    v[j - 1] = -std::expm1(std::log1p(-inner) / width);
    if (inner >= 1.0) v[j - 1] = 1.0;
  }
  return StepVector(std::move(v));
}

StepVector scale_for_fdr(const StepVector& alpha, double q) {
  const double D = d_bound(alpha).value;
  if (!(D > 0.0)) throw DomainError("D(alpha) = 0; cannot rescale");
  return alpha.scaled(q / D);
}

StepVector scale_for_pfdr(const StepVector& alpha, double q, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("gamma = " + std::to_string(gamma) + " outside (0, 1]");
  const double D = d_bound(alpha).value;
  if (!(D > 0.0)) throw DomainError("D(alpha) = 0; cannot rescale");
  return alpha.scaled(q * gamma / D);
}

}  // namespace seqfdr
