#include "seqfdr/experiment.hpp"

#include <memory>

#include "seqfdr/datagen.hpp"
#include "seqfdr/error.hpp"
#include "seqfdr/harness.hpp"

namespace seqfdr {

std::string to_string(Mode m) { return m == Mode::Open ? "open" : "rejective"; }
std::string to_string(StepScheme s) { return s == StepScheme::BH ? "bh" : "bl"; }
std::string to_string(Control c) { return c == Control::FDR ? "fdr" : "pfdr"; }

StepVector scheme_steps(StepScheme scheme, double q, std::size_t J) {
  return scheme == StepScheme::BH ? bh_steps(q, J) : bl_steps(q, J);
}

void validate(const SimulationConfig& cfg) {
  try {
    SimpleModel(cfg.family, cfg.null_param, cfg.alt_param);
  } catch (const DomainError& e) {
    throw ConfigError("model", e.what());
  }
  if (cfg.family == Family::ConditionalBinomial)
    throw ConfigError("family", "simulation supports bernoulli and poisson streams");
  if (cfg.J < 2) throw ConfigError("J", "must be >= 2");
  if (cfg.m0 > cfg.J) throw ConfigError("m0", "must not exceed J");
  if (!(cfg.copula_rho > -1.0 && cfg.copula_rho < 1.0)) throw ConfigError("rho", "must lie in (-1, 1)");
  if (!(cfg.q1 > 0.0 && cfg.q1 < 1.0)) throw ConfigError("q1", "must lie in (0, 1)");
  if (!(cfg.q2 > 0.0 && cfg.q2 < 1.0)) throw ConfigError("q2", "must lie in (0, 1)");
  if (cfg.reps < 1) throw ConfigError("reps", "must be >= 1");
  if (cfg.wald.rho < 0.0) throw ConfigError("wald_rho", "must be >= 0");
  if (cfg.mode == Mode::Rejective) {
    if (cfg.n_bar < 1) throw ConfigError("n_bar", "must be >= 1");
    if (cfg.calibration_reps < 1000) throw ConfigError("calibration_reps", "must be >= 1000");
  }
  if (cfg.control == Control::PFDR && cfg.gamma_reps < 1000)
    throw ConfigError("gamma_reps", "must be >= 1000");
  if (cfg.control == Control::PFDR && cfg.unscaled)
    throw ConfigError("unscaled", "pFDR control requires scaled step values");
  if (cfg.max_steps < 1) throw ConfigError("max_steps", "must be >= 1");
}

namespace {

std::vector<double> true_theta(const SimulationConfig& cfg, const std::vector<Truth>& truth) {
  std::vector<double> t;
  for (Truth x : truth) t.push_back(x == Truth::Alternative ? cfg.alt_param : cfg.null_param);
  return t;
}

}  // namespace

SimulationOutput run_simulation(const SimulationConfig& cfg) {
  validate(cfg);
  const SimpleModel model(cfg.family, cfg.null_param, cfg.alt_param);
  SimulationOutput out;
  out.truth = first_m0_null(cfg.J, cfg.m0);
  const std::vector<SimpleModel> models(cfg.J, model);
  const auto theta = true_theta(cfg, out.truth);

  const StepVector alpha_shape = scheme_steps(cfg.scheme, cfg.q1, cfg.J);
  const StepVector beta_shape = scheme_steps(cfg.scheme, cfg.q2, cfg.J);
  const StepVector beta = cfg.unscaled ? beta_shape : scale_for_fdr(beta_shape, cfg.q2);
  auto alpha_for = [&](double gamma) {
    if (cfg.unscaled) return alpha_shape;
    return cfg.control == Control::FDR ? scale_for_fdr(alpha_shape, cfg.q1)
                                       : scale_for_pfdr(alpha_shape, cfg.q1, gamma);
  };

  std::shared_ptr<const Standardizer> phi;
  double gamma = 1.0;
  if (cfg.mode == Mode::Open) {
    if (cfg.control == Control::PFDR) {
      out.gamma = gamma_fixed_point([&](double g) {
        const auto crit = stepdown_critical_values(alpha_for(g), beta, cfg.wald);
        return estimate_gamma(models, theta, OpenBoundaries{crit}, cfg.gamma_reps, cfg.seed,
                              cfg.workers, cfg.max_steps)
            .gamma1;
      });
      gamma = out.gamma->gamma;
    }
    const StepVector alpha = alpha_for(gamma);
    out.crit = stepdown_critical_values(alpha, beta, cfg.wald);
    phi = std::make_shared<const Standardizer>(make_standardizer(*out.crit));
    out.alpha.assign(alpha.values().begin(), alpha.values().end());
    out.a = phi->a();
  } else {
    auto calibrate = [&](double g) {
      return mc_truncated_critical_values(model, alpha_for(g), cfg.n_bar, cfg.calibration_reps,
                                          cfg.seed, cfg.workers);
    };
    if (cfg.control == Control::PFDR) {
      out.gamma = gamma_fixed_point([&](double g) {
        const auto cal = calibrate(g);
        return estimate_gamma(models, theta, TruncatedBoundaries{cal.B, cfg.n_bar}, cfg.gamma_reps,
                              cfg.seed, cfg.workers)
            .gamma1;
      });
      gamma = out.gamma->gamma;
    }
    out.calibration = calibrate(gamma);
    phi = std::make_shared<const Standardizer>(make_upper_standardizer(out.calibration->B));
    out.alpha = out.calibration->alpha;
  }
  out.beta.assign(beta.values().begin(), beta.values().end());
  out.b = phi->b();

  const auto marginals = marginals_for_truth(cfg.family, cfg.null_param, cfg.alt_param, out.truth);
  const auto sampler = std::make_shared<const CopulaSampler>(CopulaConfig{cfg.J, Toeplitz{cfg.copula_rho}});
  const std::int64_t horizon = cfg.mode == Mode::Rejective ? cfg.n_bar : CopulaPanel::kUnbounded;

  out.trials = parallel_map<TrialResult>(cfg.reps, cfg.workers, [&](std::size_t t) {
    auto panel = std::make_shared<CopulaPanel>(sampler, marginals,
                                               make_rng(cfg.seed, StreamPurpose::Trials, t), horizon);
    auto obs = panel->sources();
    SourceList src;
    src.reserve(cfg.J);
    for (auto& o : obs) src.push_back(std::make_unique<LlrStream>(std::move(o), model, phi));
    TrialResult r = cfg.mode == Mode::Open ? run_open_ended(src, out.a, out.b, cfg.max_steps)
                                           : run_rejective(src, out.b, cfg.n_bar);
    r.tally(out.truth);
    return r;
  });
  out.metrics = summarize(out.trials, out.truth);
  return out;
}

}  // namespace seqfdr
