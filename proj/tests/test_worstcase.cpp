#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "seqfdr/error.hpp"
#include "seqfdr/worstcase.hpp"

using namespace seqfdr;

namespace {

// Every (ell, k, i, j) by plain nested counting, filtered by the exclusion rules.
std::size_t brute_force_count(std::size_t J, std::size_t m0) {
  std::size_t count = 0;
  for (std::size_t k = 1; k <= J; ++k)
    for (std::size_t ell = 1; ell <= std::min(k, m0); ++ell) {
      std::size_t ni = 1, nj = 1;
      for (std::size_t d = 0; d < ell; ++d) ni *= m0, nj *= k;
      for (std::size_t ci = 0; ci < ni; ++ci) {
        std::vector<std::size_t> iv;
        for (std::size_t d = 0, x = ci; d < ell; ++d, x /= m0) iv.push_back(x % m0 + 1);
        if (!std::is_sorted(iv.begin(), iv.end()) || std::set<std::size_t>(iv.begin(), iv.end()).size() != ell)
          continue;
        for (std::size_t cj = 0; cj < nj; ++cj) {
          std::vector<std::size_t> jv;
          for (std::size_t d = 0, x = cj; d < ell; ++d, x /= k) jv.push_back(x % k + 1);
          if (k - ell > J - m0) continue;
          std::sort(jv.begin(), jv.end());
          bool ok = true;
          for (std::size_t d = 1; d <= ell; ++d) ok = ok && jv[d - 1] <= k - ell + d;
          count += ok;
        }
      }
    }
  return count;
}

LpProblem without_level(LpProblem p, std::size_t s) {
  const std::string tag = ",s=" + std::to_string(s);
  std::erase_if(p.rows, [&](const LpRow& r) { return r.label.size() >= tag.size() &&
                                                     r.label.compare(r.label.size() - tag.size(), tag.size(), tag) == 0; });
  return p;
}

}  // namespace

TEST_CASE("variable enumeration") {
  const auto v = enumerate_variables(2, 1);
  CHECK(v.size() == 3);
  CHECK(brute_force_count(2, 1) == 3);
  bool has_k2_j2 = false;
  for (const auto& x : v) has_k2_j2 = has_k2_j2 || (x.k == 2 && x.ell == 1 && x.j_vec[0] == 2);
  CHECK(has_k2_j2);

  for (const auto& x : enumerate_variables(2, 2))
    if (x.k == 1) CHECK(x.j_vec == std::vector<std::size_t>{1});

  // k - ell = 2 equals J - m0 = 2: retained.
  bool boundary = false;
  for (const auto& x : enumerate_variables(3, 1)) boundary = boundary || (x.k == 3 && x.ell == 1);
  CHECK(boundary);

  for (std::size_t J = 2; J <= 5; ++J)
    for (std::size_t m0 = 0; m0 <= J; ++m0) {
      CAPTURE(J);
      CAPTURE(m0);
      const auto vars = enumerate_variables(J, m0);
      CHECK(vars.size() == brute_force_count(J, m0));
      for (const auto& x : vars) {
        CHECK(x.i_vec.size() == x.ell);
        CHECK(x.j_vec.size() == x.ell);
        CHECK(std::is_sorted(x.i_vec.begin(), x.i_vec.end()));
        CHECK(x.i_vec.back() <= m0);
      }
    }
  CHECK_THROWS_AS(enumerate_variables(6, 2), DomainError);
  CHECK_THROWS_AS(enumerate_variables(1, 1), DomainError);
  CHECK_THROWS_AS(enumerate_variables(3, 4), DomainError);
}

TEST_CASE("problem construction") {
  const auto p = build_problem(bh_steps(0.2, 4), 3);
  CHECK(p.rows.size() == 3 * 4 + 3);
  for (double c : p.objective) CHECK((c > 0.0 && c <= 1.0));
  CHECK(build_problem(StepVector({0.5, 1.0}), 2).rows.size() == 4);  // alpha_J = 1: no total rows

  // All-zero right-hand sides force the optimum to 0.
  auto z = build_problem(bh_steps(0.2, 3), 3);
  for (auto& r : z.rows) r.rhs = 0.0;
  CHECK(solve_max(z).optimum == 0.0);
}

TEST_CASE("solver on hand-checkable programs") {
  // max 3x + 2y, x + y <= 4, x <= 3  ->  (3, 1), value 11.
  LpProblem p;
  p.objective = {3.0, 2.0};
  p.variables.resize(2);
  p.rows = {{{0, 1}, 4.0, "a"}, {{0}, 3.0, "b"}};
  const auto s = solve_max(p);
  CHECK(s.optimum == doctest::Approx(11.0));
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.x[1] == doctest::Approx(1.0));

  LpProblem unb;
  unb.objective = {1.0, 1.0};
  unb.variables.resize(2);
  unb.rows = {{{0}, 1.0, "a"}};
  CHECK_THROWS_AS(solve_max(unb), NumericalError);

  // Random 0/1 programs against enumeration of all vertices of the box-like polytope.
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int t = 0; t < 200; ++t) {
    LpProblem q;
    q.variables.resize(2);
    q.objective = {u(rng), u(rng)};
    q.rows = {{{0}, u(rng), "x"}, {{1}, u(rng), "y"}, {{0, 1}, u(rng), "xy"}};
    const double X = q.rows[0].rhs, Y = q.rows[1].rhs, S = q.rows[2].rhs;
    double best = 0.0;
    const std::pair<double, double> cand[] = {{std::min(X, S), 0}, {0, std::min(Y, S)},
                                              {std::min(X, S), std::min(Y, S - std::min(X, S))},
                                              {std::min(X, S - std::min(Y, S)), std::min(Y, S)}};
    for (auto [x, y] : cand)
      if (x >= -1e-12 && y >= -1e-12) best = std::max(best, q.objective[0] * x + q.objective[1] * y);
    CHECK(solve_max(q).optimum == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("LP optimum against the closed-form bound") {
  const StepVector a({0.125, 0.25});
  CHECK(solve_max(build_problem(a, 1)).optimum == doctest::Approx(0.1875).epsilon(1e-9));
  CHECK(solve_max(build_problem(a, 2)).optimum == doctest::Approx(0.25).epsilon(1e-9));
  const auto zero = verify_bound(a, 0);
  CHECK(zero.lp == 0.0);
  CHECK(zero.d == 0.0);
  CHECK(zero.pass);

  for (std::size_t J = 2; J <= 4; ++J)
    for (std::size_t m0 = 1; m0 <= J; ++m0) {
      CAPTURE(J);
      CAPTURE(m0);
      const auto r = verify_bound(bh_steps(0.2, J), m0, "bh");
      CHECK(r.pass);
      CHECK(r.gap <= 1e-7);
    }
  CHECK_THROWS_AS(verify_bound(bh_steps(0.2, 6), 2), DomainError);
  CHECK_THROWS_AS(verify_bound(bh_steps(0.2, 6), 0), DomainError);
}

TEST_CASE("property: the LP never exceeds the bound and its solutions are feasible") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.01, 0.6);
  std::vector<StepVector> cases;
  for (std::size_t J = 2; J <= 4; ++J) {
    cases.push_back(bl_steps(0.05, J));
    cases.push_back(bh_steps(0.3, J));
    for (int t = 0; t < 8; ++t) {
      std::vector<double> v(J);
      for (double& x : v) x = u(rng);
      std::sort(v.begin(), v.end());
      cases.emplace_back(v);
    }
  }
  for (const auto& a : cases)
    for (std::size_t m0 = 1; m0 <= a.size(); ++m0) {
      const auto p = build_problem(a, m0);
      const auto s = solve_max(p);
      CHECK(s.optimum <= d_bound_at(a, m0) + 1e-7);
      for (double x : s.x) CHECK(x >= 0.0);
      for (const auto& row : p.rows) {
        double lhs = 0.0;
        for (std::size_t c : row.cols) lhs += s.x[c];
        CHECK(lhs <= row.rhs + 1e-9);
      }
    }
}

TEST_CASE("every constraint level is active for some J = 3 instance") {
  const std::vector<StepVector> instances{bh_steps(0.2, 3), bh_steps(0.6, 3), StepVector({0.05, 0.3, 0.35})};
  for (std::size_t s = 1; s <= 3; ++s) {
    bool increases = false;
    for (const auto& a : instances)
      for (std::size_t m0 = 1; m0 <= 3; ++m0) {
        const auto full = build_problem(a, m0);
        const double base = solve_max(full).optimum;
        const double relaxed = solve_max(without_level(full, s)).optimum;
        CHECK(relaxed >= base - 1e-12);
        increases = increases || relaxed > base + 1e-9;
      }
    CAPTURE(s);
    CHECK(increases);
  }
}
