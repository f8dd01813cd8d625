#include <algorithm>
#include <cmath>

#include "seqfdr/kernels.hpp"

namespace seqfdr::kernels {
namespace {

void normal_cdf(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * std::erfc(-x[i] * M_SQRT1_2);
}

void lower_tri_matvec(const double* L, const double* z, double* y, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = L + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c <= r; ++c) acc += row[c] * z[c];
    y[r] = acc;
  }
}

void bernoulli_indicator(const double* u, double p, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i] <= p ? 1.0 : 0.0;
}

void table_invert(const double* u, const double* cdf, std::size_t table_len, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(std::lower_bound(cdf, cdf + table_len, u[i]) - cdf);
}

void advance_paths(const double* x, double step, LlrWeights w, double* S, double* stat,
                   double* runmax, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    S[i] += x[i];
    const double v = (S[i] * w.success + (step - S[i]) * w.failure) + step * w.per_step;
    stat[i] = v;
    runmax[i] = std::max(runmax[i], v);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", normal_cdf, lower_tri_matvec, bernoulli_indicator,
                                 table_invert, advance_paths};
  return table;
}

}  // namespace seqfdr::kernels
