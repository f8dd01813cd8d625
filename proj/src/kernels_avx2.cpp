// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "seqfdr/kernels.hpp"

namespace seqfdr::kernels {
namespace {

// exp(x) for x in [-745, 0]: Cody-Waite reduction and the Cephes rational
// approximation on [-ln2/2, ln2/2]. Inputs here are always -a^2/2 <= 0.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  x = _mm256_max_pd(x, lo);
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(k, _mm256_set1_pd(6.93145751953125E-1)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(k, _mm256_set1_pd(1.42860682030941723212E-6)));

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  // e * 2^k via the exponent field; k >= -1022 after the clamp above.
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m256i k64 = _mm256_cvtepi32_epi64(k32);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

inline __m256d horner(__m256d x, std::initializer_list<double> c) {
  auto it = c.begin();
  __m256d acc = _mm256_set1_pd(*it++);
  for (; it != c.end(); ++it) acc = _mm256_add_pd(_mm256_mul_pd(acc, x), _mm256_set1_pd(*it));
  return acc;
}

// Hart's double-precision rational approximation of the normal tail.
inline __m256d phi4(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d a = _mm256_andnot_pd(sign_mask, x);
  const __m256d e = exp_nonpositive(_mm256_mul_pd(_mm256_mul_pd(a, a), _mm256_set1_pd(-0.5)));

  const __m256d num = horner(a, {3.52624965998911E-02, 0.700383064443688, 6.37396220353165,
                                 33.912866078383, 112.079291497871, 221.213596169931,
                                 220.206867912376});
  const __m256d den = horner(a, {8.83883476483184E-02, 1.75566716318264, 16.064177579207,
                                 86.7807322029461, 296.564248779674, 637.333633378831,
                                 793.826512519948, 440.413735824752});
  const __m256d near = _mm256_div_pd(_mm256_mul_pd(e, num), den);

  __m256d b = _mm256_add_pd(a, _mm256_set1_pd(0.65));
  b = _mm256_add_pd(a, _mm256_div_pd(_mm256_set1_pd(4.0), b));
  b = _mm256_add_pd(a, _mm256_div_pd(_mm256_set1_pd(3.0), b));
  b = _mm256_add_pd(a, _mm256_div_pd(_mm256_set1_pd(2.0), b));
  b = _mm256_add_pd(a, _mm256_div_pd(_mm256_set1_pd(1.0), b));
  const __m256d far = _mm256_div_pd(_mm256_div_pd(e, b), _mm256_set1_pd(2.506628274631));

  const __m256d is_near = _mm256_cmp_pd(a, _mm256_set1_pd(7.07106781186547), _CMP_LT_OQ);
  __m256d tail = _mm256_blendv_pd(far, near, is_near);
  const __m256d is_zero = _mm256_cmp_pd(a, _mm256_set1_pd(37.0), _CMP_GT_OQ);
  tail = _mm256_blendv_pd(tail, _mm256_setzero_pd(), is_zero);

  const __m256d upper = _mm256_sub_pd(_mm256_set1_pd(1.0), tail);
  const __m256d positive = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ);
  return _mm256_blendv_pd(tail, upper, positive);
}

void normal_cdf(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, phi4(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::copy(x + i, x + n, buf);
    _mm256_store_pd(buf, phi4(_mm256_load_pd(buf)));
    std::copy(buf, buf + (n - i), out + i);
  }
}

void lower_tri_matvec(const double* L, const double* z, double* y, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = L + r * n;
    const std::size_t len = r + 1;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= len; c += 4)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(z + c), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; c < len; ++c) s += row[c] * z[c];
    y[r] = s;
  }
}

void bernoulli_indicator(const double* u, double p, double* out, std::size_t n) {
  const __m256d pv = _mm256_set1_pd(p);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(u + i), pv, _CMP_LE_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(m, one));
  }
  for (; i < n; ++i) out[i] = u[i] <= p ? 1.0 : 0.0;
}

void table_invert(const double* u, const double* cdf, std::size_t table_len, double* out,
                  std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uv = _mm256_loadu_pd(u + i);
    __m256d count = _mm256_setzero_pd();
    for (std::size_t k = 0; k < table_len; ++k) {
      const __m256d below = _mm256_cmp_pd(_mm256_set1_pd(cdf[k]), uv, _CMP_LT_OQ);
      if (_mm256_movemask_pd(below) == 0) break;  // table is sorted
      count = _mm256_add_pd(count, _mm256_and_pd(below, one));
    }
    _mm256_storeu_pd(out + i, count);
  }
  for (; i < n; ++i)
    out[i] = static_cast<double>(std::lower_bound(cdf, cdf + table_len, u[i]) - cdf);
}

void advance_paths(const double* x, double step, LlrWeights w, double* S, double* stat,
                   double* runmax, std::size_t n) {
  const __m256d stepv = _mm256_set1_pd(step);
  const __m256d ws = _mm256_set1_pd(w.success);
  const __m256d wf = _mm256_set1_pd(w.failure);
  const __m256d wn = _mm256_mul_pd(stepv, _mm256_set1_pd(w.per_step));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(S + i), _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(S + i, s);
    const __m256d v = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(s, ws), _mm256_mul_pd(_mm256_sub_pd(stepv, s), wf)), wn);
    _mm256_storeu_pd(stat + i, v);
    _mm256_storeu_pd(runmax + i, _mm256_max_pd(v, _mm256_loadu_pd(runmax + i)));
  }
  for (; i < n; ++i) {
    S[i] += x[i];
    const double v = (S[i] * w.success + (step - S[i]) * w.failure) + step * w.per_step;
    stat[i] = v;
    runmax[i] = std::max(runmax[i], v);
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", normal_cdf, lower_tri_matvec, bernoulli_indicator,
                                 table_invert, advance_paths};
  return &table;
}

}  // namespace seqfdr::kernels
