#include "seqfdr/worstcase.hpp"

#include <algorithm>
#include <cmath>

#include "seqfdr/error.hpp"

namespace seqfdr {

namespace {

// Calls fn for every strictly increasing ell-subset of {1..m}.
template <class Fn>
void for_each_combination(std::size_t m, std::size_t ell, Fn&& fn) {
  std::vector<std::size_t> c(ell);
  for (std::size_t d = 0; d < ell; ++d) c[d] = d + 1;
  for (;;) {
    fn(c);
    std::size_t d = ell;
    while (d > 0 && c[d - 1] == m - ell + d) --d;
    if (d == 0) return;
    ++c[d - 1];
    for (std::size_t e = d; e < ell; ++e) c[e] = c[e - 1] + 1;
  }
}

// Calls fn for every tuple in {1..k}^ell.
template <class Fn>
void for_each_tuple(std::size_t k, std::size_t ell, Fn&& fn) {
  std::vector<std::size_t> t(ell, 1);
  for (;;) {
    fn(t);
    std::size_t d = ell;
    while (d > 0 && t[d - 1] == k) t[--d] = 1;
    if (d == 0) return;
    ++t[d - 1];
  }
}

}  // namespace

std::vector<VariableIndex> enumerate_variables(std::size_t J, std::size_t m0) {
  if (J < 2) throw DomainError("LP oracle needs J >= 2");
  if (J > kMaxLpJ)
    throw DomainError("LP oracle is limited to J <= " + std::to_string(kMaxLpJ) + " (got " +
                      std::to_string(J) + ")");
  if (m0 > J) throw DomainError("m0 exceeds J");
  std::vector<VariableIndex> out;
  for (std::size_t k = 1; k <= J; ++k) {
    for (std::size_t ell = 1; ell <= std::min(k, m0); ++ell) {
      if (k - ell > J - m0) continue;
      for_each_combination(m0, ell, [&](const std::vector<std::size_t>& iv) {
        for_each_tuple(k, ell, [&](const std::vector<std::size_t>& jv) {
          std::vector<std::size_t> sorted = jv;
          std::sort(sorted.begin(), sorted.end());
          for (std::size_t d = 1; d <= ell; ++d)
            if (sorted[d - 1] > k - ell + d) return;
          out.push_back(VariableIndex{ell, k, iv, jv});
        });
      });
    }
  }
  return out;
}

LpProblem build_problem(const StepVector& alpha, std::size_t m0) {
  const std::size_t J = alpha.size();
  LpProblem p;
  p.variables = enumerate_variables(J, m0);
  p.objective.reserve(p.variables.size());
  for (const auto& v : p.variables)
    p.objective.push_back(static_cast<double>(v.ell) / static_cast<double>(v.k));

  for (std::size_t i = 1; i <= m0; ++i) {
    for (std::size_t s = 1; s <= J; ++s) {
      LpRow row;
      row.rhs = alpha.at(s);
      row.label = "i=" + std::to_string(i) + ",s=" + std::to_string(s);
      for (std::size_t c = 0; c < p.variables.size(); ++c) {
        const auto& v = p.variables[c];
        for (std::size_t d = 0; d < v.ell; ++d) {
          if (v.i_vec[d] == i && v.j_vec[d] <= s) {
            row.cols.push_back(c);
            break;
          }
        }
      }
      p.rows.push_back(std::move(row));
    }
    if (alpha.max() < 1.0) {
      LpRow row;
      row.rhs = 1.0;
      row.label = "i=" + std::to_string(i) + ",total";
      for (std::size_t c = 0; c < p.variables.size(); ++c) {
        const auto& iv = p.variables[c].i_vec;
        if (std::find(iv.begin(), iv.end(), i) != iv.end()) row.cols.push_back(c);
      }
      p.rows.push_back(std::move(row));
    }
  }
  return p;
}

LpSolution solve_max(const LpProblem& problem) {
  const std::size_t n = problem.objective.size();
  const std::size_t m = problem.rows.size();
  const std::size_t width = n + m + 1;
  constexpr double eps = 1e-12;

  for (const auto& r : problem.rows)
    if (r.rhs < 0.0) throw DomainError("simplex from the origin needs nonnegative right-hand sides");

  // Row-major tableau [A | I | b], objective row holds -c.
  std::vector<double> T((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return T[r * width + c]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c : problem.rows[r].cols) {
      if (c >= n) throw DomainError("constraint references an unknown variable");
      at(r, c) += 1.0;
    }
    at(r, n + r) = 1.0;
    at(r, width - 1) = problem.rows[r].rhs;
    basis[r] = n + r;
  }
  for (std::size_t c = 0; c < n; ++c) at(m, c) = -problem.objective[c];

  LpSolution sol;
  const std::size_t guard = 200000;
  for (;;) {
    std::size_t enter = width;
    for (std::size_t c = 0; c + 1 < width; ++c) {
      if (at(m, c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double a = at(r, enter);
      if (a <= eps) continue;
      const double ratio = at(r, width - 1) / a;
      if (leave == m || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == m) throw NumericalError("LP is unbounded");

    const double piv = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    basis[leave] = enter;
    if (++sol.pivots > guard) throw NumericalError("simplex pivot guard exceeded (cycling?)");
  }

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) sol.x[basis[r]] = std::max(0.0, at(r, width - 1));
  sol.optimum = 0.0;
  for (std::size_t c = 0; c < n; ++c) sol.optimum += problem.objective[c] * sol.x[c];

  for (const auto& row : problem.rows) {
    double lhs = 0.0;
    for (std::size_t c : row.cols) lhs += sol.x[c];
    if (lhs > row.rhs + 1e-9)
      throw NumericalError("simplex solution violates row " + row.label + " by " +
                           std::to_string(lhs - row.rhs));
  }
  return sol;
}

VerifyRow verify_bound(const StepVector& alpha, std::size_t m0, const std::string& scheme) {
  VerifyRow row;
  row.J = alpha.size();
  row.m0 = m0;
  row.scheme = scheme;
  row.d = d_bound_at(alpha, m0);
  row.lp = m0 == 0 ? 0.0 : solve_max(build_problem(alpha, m0)).optimum;
  // A size-guard check still applies when m0 = 0.
  if (m0 == 0) enumerate_variables(alpha.size(), 0);
  row.gap = std::abs(row.lp - row.d);
  row.pass = row.gap <= 1e-7;
  return row;
}

}  // namespace seqfdr
