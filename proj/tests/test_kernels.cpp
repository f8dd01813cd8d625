#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "seqfdr/error.hpp"
#include "seqfdr/kernels.hpp"

using namespace seqfdr;
using namespace seqfdr::kernels;

namespace {

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

// Odd lengths exercise the vector tails.
constexpr std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 13, 64, 1001};

const KernelTable* simd() {
  const KernelTable* t = avx2_table();
  return t != nullptr && cpu_has_avx2() ? t : nullptr;
}

}  // namespace

TEST_CASE("scalar normal_cdf against erfc in long double") {
  std::mt19937_64 rng(1);
  auto x = normals(rng, 5000, 3.0);
  x.insert(x.end(), {0.0, -0.0, -8.0, 8.0, -38.0, 38.0, -1e-300, 1e-300});
  std::vector<double> out(x.size());
  scalar_table().normal_cdf(x.data(), out.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double ref = 0.5L * std::erfc(-static_cast<long double>(x[i]) / std::sqrt(2.0L));
    CHECK(std::abs(out[i] - static_cast<double>(ref)) <= 1e-15);
  }
}

TEST_CASE("scalar table_invert is the right-continuous inverse") {
  const double cdf[] = {0.2, 0.5, 0.5, 0.9, 1.0};
  const double u[] = {0.1, 0.2, 0.2000001, 0.5, 0.6, 0.95, 1.0};
  const double want[] = {0, 0, 1, 1, 3, 4, 4};
  double out[7];
  scalar_table().table_invert(u, cdf, 5, out, 7);
  for (int i = 0; i < 7; ++i) CHECK(out[i] == want[i]);
}

TEST_CASE("dispatch") {
  CHECK_NOTHROW(select("scalar"));
  CHECK(active().name == "scalar");
  CHECK_THROWS_AS(select("neon"), DomainError);
  if (simd() != nullptr) {
    select("avx2");
    CHECK(active().name == "avx2");
  } else {
    CHECK_THROWS_AS(select(Level::Avx2), DomainError);
  }
  select("auto");
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const KernelTable* v = simd();
  if (v == nullptr) {
    MESSAGE("AVX2 kernels unavailable; equivalence not exercised");
    return;
  }
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (std::size_t n : kLengths) {
    CAPTURE(n);
    auto x = normals(rng, n, 4.0);
    if (n > 4) x[1] = -40.0, x[2] = 40.0, x[3] = 0.0;
    std::vector<double> a(n), b(n);
    s.normal_cdf(x.data(), a.data(), n);
    v->normal_cdf(x.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);

    std::vector<double> L(n * n, 0.0);
    for (std::size_t r = 0; r < n && n <= 64; ++r)
      for (std::size_t c = 0; c <= r; ++c) L[r * n + c] = unif(rng) * 2.0 - 1.0;
    if (n <= 64) {
      const auto z = normals(rng, n, 1.0);
      s.lower_tri_matvec(L.data(), z.data(), a.data(), n);
      v->lower_tri_matvec(L.data(), z.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-13 * (1.0 + std::abs(a[i])));
    }

    std::vector<double> u(n);
    for (double& t : u) t = unif(rng);
    if (n > 2) u[0] = 0.15, u[1] = std::nextafter(0.15, 1.0);
    s.bernoulli_indicator(u.data(), 0.15, a.data(), n);
    v->bernoulli_indicator(u.data(), 0.15, b.data(), n);
    CHECK(a == b);

    std::vector<double> cdf{0.1, 0.3, 0.3, 0.55, 0.8, 0.95, 0.99, 1.0};
    if (n > 3) u[2] = 0.3, u[3] = 1.0;
    s.table_invert(u.data(), cdf.data(), cdf.size(), a.data(), n);
    v->table_invert(u.data(), cdf.data(), cdf.size(), b.data(), n);
    CHECK(a == b);

    const LlrWeights w{1.0986122886681098, -0.11122563511022437, 0.0};
    std::vector<double> S1(n, 0.0), S2(n, 0.0), st1(n), st2(n), m1(n, -1e300), m2(n, -1e300);
    for (int step = 1; step <= 30; ++step) {
      for (double& t : x) t = unif(rng) < 0.1 ? 1.0 : 0.0;
      s.advance_paths(x.data(), step, w, S1.data(), st1.data(), m1.data(), n);
      v->advance_paths(x.data(), step, w, S2.data(), st2.data(), m2.data(), n);
    }
    CHECK(S1 == S2);
    CHECK(st1 == st2);
    CHECK(m1 == m2);
  }
}
