#include <doctest.h>

#include <cmath>

#include "seqfdr/error.hpp"
#include "seqfdr/experiment.hpp"

using namespace seqfdr;

namespace {

SimulationConfig small(std::size_t m0) {
  SimulationConfig c;
  c.J = 4;
  c.m0 = m0;
  c.reps = 300;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("configuration validation") {
  auto c = small(2);
  CHECK_NOTHROW(validate(c));
  c.reps = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(5);
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.copula_rho = 1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.alt_param = 0.01;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.mode = Mode::Rejective;
  c.n_bar = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.control = Control::PFDR;
  c.unscaled = true;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.family = Family::ConditionalBinomial;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small(2);
  c.J = 1;
  c.m0 = 1;
  CHECK_THROWS_AS(run_simulation(c), ConfigError);
}

TEST_CASE("simulation is independent of the worker count") {
  auto c = small(2);
  c.workers = 1;
  const auto a = run_simulation(c);
  c.workers = 3;
  const auto b = run_simulation(c);
  CHECK(a.metrics.fdr == b.metrics.fdr);
  CHECK(a.metrics.fnr == b.metrics.fnr);
  CHECK(a.metrics.mean_stream_n == b.metrics.mean_stream_n);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].total_samples == b.trials[t].total_samples);
    CHECK(a.trials[t].R == b.trials[t].R);
  }
  CHECK(a.truth == std::vector<Truth>{Truth::Null, Truth::Null, Truth::Alternative, Truth::Alternative});
  CHECK(a.alpha.size() == 4);
  CHECK(a.crit);
  CHECK(!a.calibration);
}

TEST_CASE("variants run end to end") {
  auto c = small(2);
  c.copula_rho = 0.0;
  c.family = Family::Poisson;
  c.null_param = 1.5;
  c.alt_param = 2.0;
  const auto indep = run_simulation(c);
  CHECK(indep.metrics.n_trials == c.reps);

  c = small(2);
  c.mode = Mode::Rejective;
  c.n_bar = 30;
  c.calibration_reps = 2000;
  const auto rej = run_simulation(c);
  REQUIRE(rej.calibration);
  CHECK(rej.metrics.mean_max_n <= 30.0);
  for (const auto& t : rej.trials) CHECK(t.max_n <= 30);

  c = small(2);
  c.control = Control::PFDR;
  c.gamma_reps = 2000;
  const auto p = run_simulation(c);
  REQUIRE(p.gamma);
  CHECK((p.gamma->gamma > 0.0 && p.gamma->gamma <= 1.0));

  c.mode = Mode::Rejective;
  c.n_bar = 30;
  c.calibration_reps = 2000;
  const auto pr = run_simulation(c);
  REQUIRE(pr.gamma);
  REQUIRE(pr.calibration);

  c = small(4);
  c.scheme = StepScheme::BL;
  c.unscaled = true;
  c.q1 = c.q2 = 0.05;
  const auto bl = run_simulation(c);
  CHECK(bl.metrics.fnr == 0.0);  // no alternatives
}
