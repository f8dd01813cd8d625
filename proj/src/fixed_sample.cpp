#include "seqfdr/fixed_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "seqfdr/error.hpp"
#include "seqfdr/harness.hpp"

namespace seqfdr {

double exact_pvalue(const SimpleModel& model, std::int64_t n, std::int64_t total) {
  if (n < 0 || total < 0) throw DomainError("counts must be nonnegative");
  if (total == 0) return 1.0;
  const double t = static_cast<double>(total);
  switch (model.family()) {
    case Family::Bernoulli:
    case Family::ConditionalBinomial:
      if (total > n) throw DomainError("binomial total exceeds the number of trials");
      // P(X >= t) = I_p(t, n - t + 1)
      return boost::math::ibeta(t, static_cast<double>(n - total) + 1.0, model.null_param());
    case Family::Poisson:
      if (n == 0) return 0.0;
      // P(X >= t) = P(t, mu), the regularized lower incomplete gamma.
      return boost::math::gamma_p(t, static_cast<double>(n) * model.null_param());
  }
  return 1.0;
}

std::vector<std::size_t> bh_stepup(std::span<const double> pvalues, const StepVector& alpha) {
  const std::size_t J = pvalues.size();
  if (alpha.size() != J) throw DomainError("need one step value per p-value");
  std::vector<std::size_t> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  std::size_t kstar = 0;
  for (std::size_t k = J; k >= 1; --k) {
    if (pvalues[order[k - 1]] <= alpha[k - 1]) {
      kstar = k;
      break;
    }
  }
  order.resize(kstar);
  return order;
}

namespace {

StepVector comparator_steps(const FssConfig& cfg) {
  const StepVector bh = bh_steps(cfg.q1, cfg.J);
  return cfg.scaling == FssScaling::DScaled ? scale_for_fdr(bh, cfg.q1) : bh;
}

struct RepOutcome {
  double fdp = 0.0;
  double fnp = 0.0;
};

}  // namespace

FssEstimate evaluate_fixed_sample(const FssConfig& cfg, std::int64_t n, std::size_t reps,
                                  StreamPurpose purpose) {
  if (n < 1) throw DomainError("sample size must be >= 1");
  if (reps < 2) throw DomainError("need at least 2 replicates");
  const SimpleModel model(cfg.family, cfg.null_param, cfg.alt_param);
  const auto truth = first_m0_null(cfg.J, cfg.m0);
  const auto marginals = marginals_for_truth(cfg.family, cfg.null_param, cfg.alt_param, truth);
  const auto sampler = std::make_shared<const CopulaSampler>(CopulaConfig{cfg.J, Toeplitz{cfg.copula_rho}});
  const StepVector alpha = comparator_steps(cfg);

  const auto outcomes = parallel_map<RepOutcome>(reps, cfg.workers, [&](std::size_t r) {
    auto panel = std::make_shared<CopulaPanel>(sampler, marginals, make_rng(cfg.seed, purpose, r), n);
    std::vector<std::int64_t> totals(cfg.J, 0);
    for (std::int64_t step = 1; step <= n; ++step)
      for (std::size_t j = 0; j < cfg.J; ++j) totals[j] += panel->at(j, step)->count;
    std::vector<double> p(cfg.J);
    for (std::size_t j = 0; j < cfg.J; ++j) p[j] = exact_pvalue(model, n, totals[j]);
    const auto rejected = bh_stepup(p, alpha);
    std::vector<bool> rej(cfg.J, false);
    for (std::size_t j : rejected) rej[j] = true;
    std::size_t V = 0, W = 0;
    for (std::size_t j = 0; j < cfg.J; ++j) {
      if (rej[j] && truth[j] == Truth::Null) ++V;
      if (!rej[j] && truth[j] == Truth::Alternative) ++W;
    }
    const std::size_t R = rejected.size();
    return RepOutcome{static_cast<double>(V) / static_cast<double>(std::max<std::size_t>(R, 1)),
                      static_cast<double>(W) / static_cast<double>(std::max<std::size_t>(cfg.J - R, 1))};
  });

  auto mean_se = [&](auto field) {
    double s = 0.0, ss = 0.0;
    for (const auto& o : outcomes) {
      const double v = o.*field;
      s += v;
      ss += v * v;
    }
    const double m = s / static_cast<double>(reps);
    const double var = std::max(0.0, (ss - s * m) / static_cast<double>(reps - 1));
    return std::pair{m, std::sqrt(var / static_cast<double>(reps))};
  };
  FssEstimate e;
  std::tie(e.fnr, e.fnr_se) = mean_se(&RepOutcome::fnp);
  std::tie(e.fdr, e.fdr_se) = mean_se(&RepOutcome::fdp);
  return e;
}

FssSearchResult find_matching_fss(const FssConfig& cfg) {
  if (!(cfg.target_fnr > 0.0 && cfg.target_fnr <= 1.0)) throw DomainError("target FNR must lie in (0, 1]");
  if (cfg.n_max < 1) throw DomainError("n_max must be >= 1");
  if (cfg.m0 > cfg.J) throw DomainError("m0 exceeds J");

  FssSearchResult res;
  res.target_fnr = cfg.target_fnr;
  res.reps = cfg.reps;
  res.confirm_reps = 4 * cfg.reps;

  auto probe = [&](std::int64_t n) {
    const double f = evaluate_fixed_sample(cfg, n, cfg.reps, StreamPurpose::FixedSample).fnr;
    res.probes.emplace_back(n, f);
    return f;
  };

  std::int64_t lo = 1, hi = cfg.n_max;
  if (probe(hi) > cfg.target_fnr) {
    res.n_fss = hi;
    res.found = false;
  } else {
    // Invariant: FNR(hi) <= target; every n < lo is known to miss it.
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (probe(mid) <= cfg.target_fnr) hi = mid;
      else lo = mid + 1;
    }
    res.n_fss = hi;
    res.found = true;
  }

  const FssEstimate c = evaluate_fixed_sample(cfg, res.n_fss, res.confirm_reps, StreamPurpose::Confirmation);
  res.achieved_fnr = c.fnr;
  res.achieved_fnr_se = c.fnr_se;
  res.achieved_fdr = c.fdr;
  res.within_tolerance = std::abs(c.fnr - cfg.target_fnr) <= 1.5 * c.fnr_se;
  return res;
}

}  // namespace seqfdr
