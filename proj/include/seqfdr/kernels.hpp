#pragma once

// Data-parallel inner loops used by the simulators. Every kernel has a scalar
// reference implementation and, where the build and CPU allow it, an AVX2
// variant; the active table is chosen once at runtime.
//
// Equivalence contract (checked by tests/test_kernels.cpp):
//   normal_cdf          |simd - scalar| <= 1e-15 absolute
//   lower_tri_matvec    |simd - scalar| <= 1e-13 * (1 + |y|)
//   everything else     bit-identical

#include <cstddef>
#include <span>
#include <string_view>

namespace seqfdr::kernels {

/// Coefficients of a log-likelihood ratio written in sufficient statistics:
/// llr = S*success + (n - S)*failure + n*per_step.
struct LlrWeights {
  double success = 0.0;
  double failure = 0.0;
  double per_step = 0.0;
};

struct KernelTable {
  std::string_view name;

  /// out[i] = Phi(x[i]), standard normal CDF.
  void (*normal_cdf)(const double* x, double* out, std::size_t n);

  /// y = L z for a dense row-major lower-triangular n x n factor.
  void (*lower_tri_matvec)(const double* L, const double* z, double* y, std::size_t n);

  /// out[i] = (u[i] <= p) ? 1 : 0.
  void (*bernoulli_indicator)(const double* u, double p, double* out, std::size_t n);

  /// out[i] = #{k : cdf[k] < u[i]}, i.e. min{k : F(k) >= u} for a table that
  /// covers u. The table must be nondecreasing.
  void (*table_invert)(const double* u, const double* cdf, std::size_t table_len, double* out,
                       std::size_t n);

  /// One step of many independent paths: S += x, then stat = llr(S, step),
  /// runmax = max(runmax, stat).
  void (*advance_paths)(const double* x, double step, LlrWeights w, double* S, double* stat,
                        double* runmax, std::size_t n);
};

enum class Level { Scalar, Avx2 };

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_has_avx2();

/// The table in use. Defaults to the best supported level; the environment
/// variable SEQFDR_SIMD=scalar|avx2 overrides the default.
const KernelTable& active();

/// Force a level. Throws DomainError if it is unavailable on this machine.
void select(Level level);

/// Parses "auto", "scalar" or "avx2" and selects accordingly.
void select(std::string_view name);

}  // namespace seqfdr::kernels
