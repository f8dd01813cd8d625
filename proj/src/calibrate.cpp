#include "seqfdr/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "seqfdr/datagen.hpp"
#include "seqfdr/error.hpp"
#include "seqfdr/harness.hpp"
#include "seqfdr/kernels.hpp"

namespace seqfdr {

namespace {

constexpr std::size_t kBlock = 1024;

// Draws one step of data for n independent paths.
class StepDrawer {
 public:
  StepDrawer(const SimpleModel& model, double theta) : family_(model.family()), theta_(theta) {
    switch (family_) {
      case Family::Bernoulli:
        if (!(theta > 0.0 && theta < 1.0)) throw DomainError("Bernoulli theta must lie in (0, 1)");
        break;
      case Family::Poisson:
        table_ = std::make_shared<PoissonTable>(theta);
        break;
      case Family::ConditionalBinomial:
        throw DomainError("path simulation needs a Bernoulli or Poisson model");
    }
  }

  void draw(Rng& rng, double* u, double* x, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) u[i] = uniform_open01(rng);
    const auto& k = kernels::active();
    if (family_ == Family::Bernoulli) {
      k.bernoulli_indicator(u, theta_, x, n);
      return;
    }
    const auto cdf = table_->cdf();
    k.table_invert(u, cdf.data(), cdf.size(), x, n);
    if (const double off = static_cast<double>(table_->offset()); off != 0.0)
      for (std::size_t i = 0; i < n; ++i) x[i] += off;
  }

 private:
  Family family_;
  double theta_;
  std::shared_ptr<PoissonTable> table_;
};

std::size_t block_count(std::size_t reps) { return (reps + kBlock - 1) / kBlock; }

double binomial_se(double p, std::size_t n) {
  return n == 0 ? 0.0 : std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace

std::vector<double> simulate_path_maxima(const SimpleModel& model, double theta,
                                         std::int64_t n_bar, std::size_t reps, std::uint64_t seed,
                                         StreamPurpose purpose, unsigned workers) {
  if (n_bar < 1) throw DomainError("n_bar must be >= 1");
  const StepDrawer drawer(model, theta);
  const kernels::LlrWeights w = model.weights();
  auto blocks = parallel_map<std::vector<double>>(block_count(reps), workers, [&](std::size_t blk) {
    const std::size_t n = std::min(kBlock, reps - blk * kBlock);
    Rng rng = make_rng(seed, purpose, blk);
    std::vector<double> u(n), x(n), S(n, 0.0), stat(n), runmax(n, -INFINITY);
    const auto& k = kernels::active();
    for (std::int64_t step = 1; step <= n_bar; ++step) {
      drawer.draw(rng, u.data(), x.data(), n);
      k.advance_paths(x.data(), static_cast<double>(step), w, S.data(), stat.data(), runmax.data(), n);
    }
    return runmax;
  });
  std::vector<double> out;
  out.reserve(reps);
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

CalibrationReport mc_truncated_critical_values(const SimpleModel& model, const StepVector& alpha,
                                               std::int64_t n_bar, std::size_t reps,
                                               std::uint64_t seed, unsigned workers,
                                               std::size_t validation_reps) {
  if (reps < 1) throw DomainError("calibration needs reps >= 1");
  const std::size_t J = alpha.size();
  std::vector<std::size_t> rank(J);
  for (std::size_t k = 0; k < J; ++k) {
    const double pos = std::ceil(static_cast<double>(reps + 1) * (1.0 - alpha[k]) - 1e-9);
    if (pos > static_cast<double>(reps))
      throw DomainError("insufficient reps for level " + std::to_string(k + 1) + ": alpha_" +
                        std::to_string(k + 1) + " = " + std::to_string(alpha[k]) + " needs more than " +
                        std::to_string(reps) + " paths");
    rank[k] = static_cast<std::size_t>(std::max(1.0, pos));
  }

  CalibrationReport r;
  r.family = model.family();
  r.null_param = model.null_param();
  r.alt_param = model.alt_param();
  r.alpha.assign(alpha.values().begin(), alpha.values().end());
  r.n_bar = n_bar;
  r.reps = reps;
  r.seed = seed;

  auto maxima = simulate_path_maxima(model, model.null_param(), n_bar, reps, seed,
                                     StreamPurpose::Calibration, workers);
  std::sort(maxima.begin(), maxima.end());
  r.B.resize(J);
  for (std::size_t k = 0; k < J; ++k)
    r.B[k] = std::nextafter(maxima[rank[k] - 1], std::numeric_limits<double>::infinity());

  r.validation_reps = validation_reps ? validation_reps : reps;
  auto fresh = simulate_path_maxima(model, model.null_param(), n_bar, r.validation_reps, seed,
                                    StreamPurpose::Validation, workers);
  std::sort(fresh.begin(), fresh.end());
  r.achieved.resize(J);
  for (std::size_t k = 0; k < J; ++k) {
    const auto above = fresh.end() - std::lower_bound(fresh.begin(), fresh.end(), r.B[k]);
    r.achieved[k] = static_cast<double>(above) / static_cast<double>(fresh.size());
  }
  return r;
}

nlohmann::json to_json(const CalibrationReport& r) {
  return nlohmann::json{{"family", to_string(r.family)},
                        {"null_param", r.null_param},
                        {"alt_param", r.alt_param},
                        {"alpha", r.alpha},
                        {"n_bar", r.n_bar},
                        {"reps", r.reps},
                        {"seed", r.seed},
                        {"B", r.B},
                        {"validation_reps", r.validation_reps},
                        {"achieved", r.achieved}};
}

CalibrationReport calibration_from_json(const nlohmann::json& j) {
  try {
    CalibrationReport r;
    r.family = parse_family(j.at("family").get<std::string>());
    r.null_param = j.at("null_param").get<double>();
    r.alt_param = j.at("alt_param").get<double>();
    r.alpha = j.at("alpha").get<std::vector<double>>();
    r.n_bar = j.at("n_bar").get<std::int64_t>();
    r.reps = j.at("reps").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.B = j.at("B").get<std::vector<double>>();
    r.validation_reps = j.at("validation_reps").get<std::size_t>();
    r.achieved = j.at("achieved").get<std::vector<double>>();
    if (r.B.size() != r.alpha.size()) throw DataError("calibration: B and alpha differ in length");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("calibration record: ") + e.what());
  }
}

namespace {

struct OpenHits {
  std::size_t hit1 = 0;  // B_1 before A_J
  std::size_t hit2 = 0;  // A_1 before B_J
};

OpenHits simulate_open_events(const SimpleModel& model, double theta, const CriticalMatrix& crit,
                              std::size_t reps, std::uint64_t seed, unsigned workers,
                              std::int64_t max_steps) {
  const StepDrawer drawer(model, theta);
  const kernels::LlrWeights w = model.weights();
  const std::size_t J = crit.size();
  const double b1 = crit.B[0], bJ = crit.B[J - 1], a1 = crit.A[0], aJ = crit.A[J - 1];
  auto parts = parallel_map<OpenHits>(block_count(reps), workers, [&](std::size_t blk) {
    const std::size_t n = std::min(kBlock, reps - blk * kBlock);
    Rng rng = make_rng(seed, StreamPurpose::Gamma, blk);
    std::vector<double> u(n), x(n), S(n, 0.0), stat(n), runmax(n, -INFINITY);
    // 0 = undecided, 1 = event, 2 = complement
    std::vector<unsigned char> e1(n, 0), e2(n, 0);
    std::size_t open = 2 * n;
    OpenHits h;
    const auto& k = kernels::active();
    for (std::int64_t step = 1; step <= max_steps && open > 0; ++step) {
      drawer.draw(rng, u.data(), x.data(), n);
      k.advance_paths(x.data(), static_cast<double>(step), w, S.data(), stat.data(), runmax.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = stat[i];
        if (e1[i] == 0 && (v >= b1 || v <= aJ)) {
          e1[i] = v >= b1 ? 1 : 2;
          h.hit1 += e1[i] == 1;
          --open;
        }
        if (e2[i] == 0 && (v <= a1 || v >= bJ)) {
          e2[i] = v <= a1 ? 1 : 2;
          h.hit2 += e2[i] == 1;
          --open;
        }
      }
    }
    return h;
  });
  OpenHits total;
  for (const auto& p : parts) {
    total.hit1 += p.hit1;
    total.hit2 += p.hit2;
  }
  return total;
}

}  // namespace

GammaEstimate estimate_gamma(const std::vector<SimpleModel>& models,
                             const std::vector<double>& theta, const GammaBoundaries& bounds,
                             std::size_t reps, std::uint64_t seed, unsigned workers,
                             std::int64_t max_steps) {
  const std::size_t J = models.size();
  if (J == 0 || theta.size() != J) throw DomainError("need one model and one theta per stream");
  if (reps < 1) throw DomainError("gamma estimation needs reps >= 1");
  const bool open = std::holds_alternative<OpenBoundaries>(bounds);

  GammaEstimate g;
  g.reps = reps;
  g.theta = theta;
  g.per_stream1.resize(J);
  g.se1.resize(J);
  if (open) {
    g.per_stream2.resize(J);
    g.se2.resize(J);
  }

  struct Key {
    SimpleModel model;
    double theta;
  };
  std::vector<Key> seen;
  std::vector<std::pair<double, double>> cache;
  for (std::size_t j = 0; j < J; ++j) {
    std::size_t idx = 0;
    while (idx < seen.size() && !(seen[idx].model == models[j] && seen[idx].theta == theta[j])) ++idx;
    if (idx == seen.size()) {
      seen.push_back({models[j], theta[j]});
      const std::uint64_t sub = mix64(seed ^ (0x1000 + idx));
      if (open) {
        const auto& crit = std::get<OpenBoundaries>(bounds).crit;
        const auto h = simulate_open_events(models[j], theta[j], crit, reps, sub, workers, max_steps);
        cache.emplace_back(static_cast<double>(h.hit1) / static_cast<double>(reps),
                           static_cast<double>(h.hit2) / static_cast<double>(reps));
      } else {
        const auto& tb = std::get<TruncatedBoundaries>(bounds);
        if (tb.B.empty()) throw DomainError("truncated boundaries are empty");
        const auto m = simulate_path_maxima(models[j], theta[j], tb.n_bar, reps, sub,
                                            StreamPurpose::Gamma, workers);
        const auto hits = std::count_if(m.begin(), m.end(), [&](double v) { return v >= tb.B[0]; });
        cache.emplace_back(static_cast<double>(hits) / static_cast<double>(reps), 0.0);
      }
    }
    g.per_stream1[j] = cache[idx].first;
    g.se1[j] = binomial_se(cache[idx].first, reps);
    if (open) {
      g.per_stream2[j] = cache[idx].second;
      g.se2[j] = binomial_se(cache[idx].second, reps);
    }
  }
  g.gamma1 = *std::max_element(g.per_stream1.begin(), g.per_stream1.end());
  if (open) g.gamma2 = *std::max_element(g.per_stream2.begin(), g.per_stream2.end());
  return g;
}

GammaFixedPoint gamma_fixed_point(const std::function<double(double)>& estimate, double floor,
                                  std::size_t max_iter) {
  GammaFixedPoint fp;
  double gamma = 1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double e = estimate(gamma);
    fp.history.push_back(e);
    fp.iterations = it;
    if (e >= gamma) {
      fp.gamma = gamma;
      return fp;
    }
    gamma = e;
    if (gamma < floor)
      throw NumericalError("gamma collapsed to " + std::to_string(gamma) +
                           ": no useful lower bound on P(R > 0) for this configuration");
  }
  throw NumericalError("gamma iteration did not settle after " + std::to_string(max_iter) +
                       " rounds");
}

}  // namespace seqfdr
