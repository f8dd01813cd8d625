#pragma once

// Worst-case FDR over joint distributions of the step-down events, as a
// small linear program. Used to check the closed-form bound D(alpha, m0).

#include <cstddef>
#include <string>
#include <vector>

#include "seqfdr/core.hpp"

namespace seqfdr {

inline constexpr std::size_t kMaxLpJ = 5;

/// p_{i,j,k}: probability that exactly k hypotheses are rejected, ell of them
/// true nulls i_1 < ... < i_ell, null i_d being rejected at level j_d.
struct VariableIndex {
  std::size_t ell = 0;
  std::size_t k = 0;
  std::vector<std::size_t> i_vec;  // 1-based
  std::vector<std::size_t> j_vec;  // 1-based, one level per entry of i_vec
};

/// Variables not forced to zero: k - ell <= J - m0 and sorted j_(d) <= k - ell + d.
std::vector<VariableIndex> enumerate_variables(std::size_t J, std::size_t m0);

struct LpRow {
  std::vector<std::size_t> cols;  // coefficient 1 on each
  double rhs = 0.0;
  std::string label;
};

/// maximize objective . x subject to rows (<=) and x >= 0.
struct LpProblem {
  std::vector<VariableIndex> variables;
  std::vector<double> objective;
  std::vector<LpRow> rows;
};

/// Objective ell/k; one row per (i, s) bounding P(null i rejected at level
/// <= s) by alpha_s; one total-probability row per i unless alpha_J = 1.
LpProblem build_problem(const StepVector& alpha, std::size_t m0);

struct LpSolution {
  double optimum = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

/// Dense primal simplex from the origin with Bland's rule. Requires rhs >= 0.
/// Throws NumericalError on unboundedness, cycling-guard overflow, or a
/// solution that fails the 1e-9 feasibility self-check.
LpSolution solve_max(const LpProblem& problem);

struct VerifyRow {
  std::size_t J = 0;
  std::size_t m0 = 0;
  std::string scheme;
  double lp = 0.0;
  double d = 0.0;
  double gap = 0.0;  // |lp - d|
  bool pass = false;
};

/// Compares the LP optimum with d_bound_at(alpha, m0) at tolerance 1e-7.
VerifyRow verify_bound(const StepVector& alpha, std::size_t m0, const std::string& scheme = "custom");

}  // namespace seqfdr
