#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "seqfdr/core.hpp"
#include "seqfdr/error.hpp"

using namespace seqfdr;

namespace {

// Abel-summed form: D = m * sum_j alpha_j (w_j - w_{j+1}), with w_j the weight
// on the j-th increment. Evaluated in long double, term by term.
long double naive_d(const std::vector<double>& a, std::size_t m) {
  const std::size_t J = a.size();
  if (m == 0) return 0.0L;
  auto w = [&](std::size_t j) -> long double {
    if (j > J) return 0.0L;
    if (j <= J - m + 1) return 1.0L / j;
    return static_cast<long double>(J - m) / (static_cast<long double>(j) * (j - 1));
  };
  long double s = 0.0L;
  for (std::size_t j = 1; j <= J; ++j) s += static_cast<long double>(a[j - 1]) * (w(j) - w(j + 1));
  return m * s;
}

std::vector<double> random_steps(std::mt19937_64& rng, std::size_t J) {
  std::uniform_real_distribution<double> u(1e-4, 1.0);
  std::vector<double> v(J);
  for (double& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("d_bound_at hand values") {
  const StepVector a({0.125, 0.25});
  CHECK(d_bound_at(a, 0) == 0.0);
  CHECK(d_bound_at(a, 1) == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(d_bound_at(a, 2) == doctest::Approx(0.25).epsilon(1e-14));
  const StepVector b({0.1, 0.2, 0.3});
  CHECK(d_bound_at(b, 2) == doctest::Approx(2.0 * (0.15 + 0.1 / 6.0)).epsilon(1e-14));
  CHECK(d_bound_at(b, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(d_bound_at(b, 4), DomainError);
}

TEST_CASE("d_bound maximizes over m with smallest argmax") {
  const auto r = d_bound(StepVector({0.125, 0.25}));
  CHECK(r.value == doctest::Approx(0.25));
  CHECK(r.argmax_m == 2);
  REQUIRE(r.per_m.size() == 3);
  CHECK(r.per_m[0] == 0.0);

  const auto s = d_bound(StepVector({0.1, 0.2, 0.3}));
  CHECK(s.value == doctest::Approx(1.0 / 3.0));
  CHECK(s.argmax_m == 2);
  CHECK(s.value == *std::max_element(s.per_m.begin(), s.per_m.end()));

  // Flat vector: only the first increment counts, D(alpha, m) = m alpha_1.
  const auto f = d_bound(StepVector({0.2, 0.2, 0.2}));
  CHECK(f.argmax_m == 3);
  CHECK(f.value == doctest::Approx(0.6));

}

TEST_CASE("step value schemes") {
  const auto bh = bh_steps(0.25, 10);
  for (std::size_t j = 1; j <= 10; ++j) CHECK(bh.at(j) == doctest::Approx(0.025 * j).epsilon(1e-15));
  const auto small = bh_steps(0.3, 3);
  CHECK(small.size() == 3);
  for (std::size_t j = 1; j <= 3; ++j) CHECK(small.at(j) == doctest::Approx(0.1 * j).epsilon(1e-15));

  const auto bl = bl_steps(0.05, 10);
  CHECK(bl.at(10) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bl.at(1) == doctest::Approx(1.0 - std::pow(0.95L, 0.1L)).epsilon(1e-13));
  CHECK(bl.at(1) == doctest::Approx(0.005116).epsilon(1e-4));

  for (double q : {0.01, 0.05, 0.25})
    for (std::size_t J = 2; J <= 50; ++J) {
      CHECK_NOTHROW(bh_steps(q, J));
      const auto v = bl_steps(q, J);
      for (std::size_t j = 1; j < J; ++j) CHECK(v.at(j) <= v.at(j + 1));
      CHECK(v.max() <= 1.0);
    }

  CHECK_THROWS_AS(bh_steps(0.0, 5), DomainError);
  CHECK_THROWS_AS(bl_steps(1.0, 5), DomainError);
  CHECK_THROWS_AS(bh_steps(0.2, 1), DomainError);
  CHECK_THROWS_AS(StepVector({0.2, 0.1}), DomainError);
  CHECK_THROWS_AS(StepVector({0.0, 0.1}), DomainError);
  CHECK_THROWS_AS(StepVector({0.5, 1.5}), DomainError);
}

TEST_CASE("scaling for FDR and pFDR") {
  const StepVector a({0.125, 0.25});
  const auto s = scale_for_fdr(a, 0.1);
  CHECK(s[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(scale_for_pfdr(a, 0.1, 1.0) == s);
  const auto p = scale_for_pfdr(a, 0.1, 0.5);
  CHECK(p[0] == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK_THROWS_AS(scale_for_pfdr(a, 0.1, 0.0), DomainError);

  const auto flat = scale_for_fdr(StepVector({0.3, 0.3, 0.3}), 0.1);
  CHECK(flat[0] == flat[1]);
  CHECK(flat[1] == flat[2]);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const StepVector v(random_steps(rng, 2 + t % 30));
    CHECK(std::abs(d_bound(scale_for_fdr(v, 0.2)).value - 0.2) <= 1e-12);
    CHECK(std::abs(d_bound(scale_for_pfdr(v, 0.2, 0.7)).value - 0.14) <= 1e-12);
  }
}

TEST_CASE("property: agreement with the naive summation") {
  std::mt19937_64 rng(20240611);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t J = 2 + rng() % 49;
    const auto v = random_steps(rng, J);
    const StepVector a(v);
    for (std::size_t m = 0; m <= J; ++m) {
      const double d = d_bound_at(a, m);
      CHECK(d >= 0.0);
      CHECK(std::abs(d - static_cast<double>(naive_d(v, m))) <= 1e-12);
    }
  }
}

TEST_CASE("property: positive homogeneity and monotonicity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t J = 2 + rng() % 40;
    const StepVector a(random_steps(rng, J));
    const double c = (0.01 + 0.99 * u(rng)) / a.max();
    const auto base = d_bound(a);
    const auto scaled = d_bound(a.scaled(c));
    CHECK(std::abs(scaled.value - c * base.value) <= 1e-12);
    CHECK(scaled.argmax_m == base.argmax_m);

    std::vector<double> hi(a.values().begin(), a.values().end());
    std::vector<double> bump(J);
    for (double& x : bump) x = 0.05 * u(rng);
    std::sort(bump.begin(), bump.end());
    for (std::size_t j = 0; j < J; ++j) hi[j] = std::min(1.0, hi[j] + bump[j]);
    CHECK(d_bound(StepVector(hi)).value >= base.value - 1e-15);
  }
}
