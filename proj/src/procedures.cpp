#include "seqfdr/procedures.hpp"

#include <algorithm>
#include <cmath>

namespace seqfdr {

LlrStream::LlrStream(std::unique_ptr<ObservationSource> obs, SimpleModel model,
                     std::shared_ptr<const Standardizer> phi)
    : obs_(std::move(obs)), model_(model), phi_(std::move(phi)) {
  if (!obs_ || !phi_) throw DomainError("LlrStream needs an observation source and a standardizer");
}

std::optional<double> LlrStream::next() {
  const auto x = obs_->next();
  if (!x) return std::nullopt;
  model_.llr_increment(*x);  // support check only
  count_ += x->count;
  trials_ += x->trials;
  ++steps_;
  raw_ = model_.llr_from_totals(count_, trials_, steps_);
  return (*phi_)(raw_);
}

const char* to_string(Action a) { return a == Action::Reject ? "reject" : "accept"; }

void TrialResult::tally(std::span<const Truth> truth) {
  if (truth.size() != decisions.size()) throw DomainError("truth labels do not match J");
  V = W = 0;
  for (const Decision& d : decisions) {
    if (d.action == Action::Reject && truth[d.stream] == Truth::Null) ++V;
    if (d.action == Action::Accept && truth[d.stream] == Truth::Alternative) ++W;
  }
}

namespace {

struct Runner {
  SourceList& sources;
  std::size_t J;
  std::vector<double> value;
  std::vector<std::optional<Decision>> decided;
  ProcedureState st;

  explicit Runner(SourceList& s) : sources(s), J(s.size()), value(s.size()), decided(s.size()) {
    if (J == 0) throw DomainError("procedure needs at least one stream");
    for (const auto& p : sources)
      if (!p) throw DomainError("null stream source");
    st.active.resize(J);
    for (std::size_t j = 0; j < J; ++j) st.active[j] = j;
  }

  void draw() {
    ++st.n;
    for (std::size_t j : st.active) {
      const auto v = sources[j]->next();
      if (!v)
        throw DataUnderrun("stream " + std::to_string(j + 1) + " exhausted at step " +
                               std::to_string(st.n),
                           st);
      value[j] = *v;
    }
  }

  double active_max() const {
    double m = -INFINITY;
    for (std::size_t j : st.active) m = std::max(m, value[j]);
    return m;
  }

  double active_min() const {
    double m = INFINITY;
    for (std::size_t j : st.active) m = std::min(m, value[j]);
    return m;
  }

  std::vector<std::size_t> ordered() const {
    std::vector<std::size_t> o = st.active;
    std::sort(o.begin(), o.end(), [&](std::size_t x, std::size_t y) {
      return value[x] < value[y] || (value[x] == value[y] && x < y);
    });
    return o;
  }

  // Largest t with the top t ordered statistics all clearing their b level.
  std::size_t reject_count(const std::vector<std::size_t>& o, std::span<const double> b) const {
    const std::size_t m = o.size();
    std::size_t t = 0;
    for (std::size_t l = m; l >= 1; --l) {
      if (value[o[l - 1]] >= b[st.rejected + m - l]) ++t;
      else break;
    }
    return t;
  }

  std::size_t accept_count(const std::vector<std::size_t>& o, std::span<const double> a) const {
    std::size_t t = 0;
    for (std::size_t l = 1; l <= o.size(); ++l) {
      if (value[o[l - 1]] <= a[st.accepted + l - 1]) ++t;
      else break;
    }
    return t;
  }

  void decide(std::size_t j, Action act, std::size_t level, bool truncated) {
    decided[j] = Decision{j, act, st.n, level, truncated};
  }

  void drop_decided() {
    std::erase_if(st.active, [&](std::size_t j) { return decided[j].has_value(); });
  }

  // Accept everything still active, ranked from the smallest statistic.
  void accept_rest(bool truncated) {
    const auto o = ordered();
    for (std::size_t l = 1; l <= o.size(); ++l)
      decide(o[l - 1], Action::Accept, st.accepted + l, truncated);
    st.accepted += o.size();
    st.active.clear();
  }

  TrialResult finish() {
    TrialResult out;
    out.decisions.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
      const Decision& d = *decided[j];
      out.decisions.push_back(d);
      if (d.action == Action::Reject) ++out.R;
      out.max_n = std::max(out.max_n, d.step);
      out.total_samples += d.step;
    }
    return out;
  }
};

void check_boundaries(std::span<const double> b, std::size_t J) {
  if (b.size() != J) throw DomainError("need one b boundary per stream");
  for (std::size_t k = 1; k < J; ++k)
    if (b[k] > b[k - 1]) throw DomainError("b boundaries must be nonincreasing");
}

}  // namespace

TrialResult run_open_ended(SourceList& sources, std::span<const double> a,
                           std::span<const double> b, std::int64_t max_steps,
                           const StageObserver& observer) {
  Runner run(sources);
  const std::size_t J = run.J;
  check_boundaries(b, J);
  if (a.size() != J) throw DomainError("need one a boundary per stream");
  for (std::size_t k = 1; k < J; ++k)
    if (a[k] < a[k - 1]) throw DomainError("a boundaries must be nondecreasing");
  if (a[J - 1] > b[J - 1]) throw DomainError("a_J must not exceed b_J");

  while (!run.st.active.empty()) {
    ++run.st.stage;
    if (observer) observer(run.st);
    const double hi = b[run.st.rejected];
    const double lo = a[run.st.accepted];
    bool up = false;
    bool down = false;
    while (!up && !down) {
      if (run.st.n >= max_steps)
        throw GuardExceeded("open-ended procedure exceeded " + std::to_string(max_steps) +
                                " steps",
                            run.st);
      run.draw();
      up = run.active_max() >= hi;
      down = run.active_min() <= lo;
    }

    const auto o = run.ordered();
    const std::size_t m = o.size();
    const std::size_t t = up ? run.reject_count(o, b) : 0;
    // With a_J == b_J one statistic can meet both rules; rejection wins.
    const std::size_t ta = down ? std::min(run.accept_count(o, a), m - t) : 0;
    for (std::size_t l = m - t + 1; l <= m; ++l)
      run.decide(o[l - 1], Action::Reject, run.st.rejected + m - l + 1, false);
    for (std::size_t l = 1; l <= ta; ++l)
      run.decide(o[l - 1], Action::Accept, run.st.accepted + l, false);
    run.st.rejected += t;
    run.st.accepted += ta;
    run.drop_decided();
  }
  return run.finish();
}

TrialResult run_rejective(SourceList& sources, std::span<const double> b, std::int64_t n_bar,
                          const StageObserver& observer) {
  Runner run(sources);
  const std::size_t J = run.J;
  check_boundaries(b, J);
  if (n_bar < 1) throw DomainError("n_bar must be >= 1");

  while (!run.st.active.empty()) {
    ++run.st.stage;
    if (observer) observer(run.st);
    const double hi = b[run.st.rejected];
    bool up = false;
    while (!up && run.st.n < n_bar) {
      run.draw();
      up = run.active_max() >= hi;
    }
    if (!up) {
      run.accept_rest(true);
      break;
    }
    const auto o = run.ordered();
    const std::size_t m = o.size();
    const std::size_t t = run.reject_count(o, b);
    for (std::size_t l = m - t + 1; l <= m; ++l)
      run.decide(o[l - 1], Action::Reject, run.st.rejected + m - l + 1, false);
    run.st.rejected += t;
    run.drop_decided();
    if (run.st.n == n_bar && !run.st.active.empty()) run.accept_rest(true);
  }
  return run.finish();
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double se() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

}  // namespace

MetricsSummary summarize(std::span<const TrialResult> trials, std::span<const Truth> truth) {
  if (trials.empty()) throw DomainError("summarize needs at least one trial");
  const std::size_t J = truth.size();
  Moments fdp, fnp, pfdp, pfnp, maxn, streamn;
  for (const TrialResult& tr : trials) {
    if (tr.decisions.size() != J) throw DomainError("trial has the wrong number of decisions");
    std::size_t R = 0, V = 0, W = 0;
    for (const Decision& d : tr.decisions) {
      if (d.action == Action::Reject) {
        ++R;
        if (truth[d.stream] == Truth::Null) ++V;
      } else if (truth[d.stream] == Truth::Alternative) {
        ++W;
      }
    }
    const double fd = static_cast<double>(V) / static_cast<double>(std::max<std::size_t>(R, 1));
    const double fn = static_cast<double>(W) / static_cast<double>(std::max<std::size_t>(J - R, 1));
    fdp.add(fd);
    fnp.add(fn);
    if (R >= 1) pfdp.add(fd);
    if (R < J) pfnp.add(fn);
    maxn.add(static_cast<double>(tr.max_n));
    streamn.add(static_cast<double>(tr.total_samples) / static_cast<double>(J));
  }

  MetricsSummary s;
  s.n_trials = trials.size();
  s.fdr = fdp.mean();
  s.fdr_se = fdp.se();
  s.fnr = fnp.mean();
  s.fnr_se = fnp.se();
  s.n_trials_with_rejection = pfdp.count;
  s.n_trials_with_acceptance = pfnp.count;
  if (pfdp.count) {
    s.pfdr = pfdp.mean();
    s.pfdr_se = pfdp.se();
  }
  if (pfnp.count) {
    s.pfnr = pfnp.mean();
    s.pfnr_se = pfnp.se();
  }
  s.mean_max_n = maxn.mean();
  s.mean_max_n_se = maxn.se();
  s.mean_stream_n = streamn.mean();
  s.mean_stream_n_se = streamn.se();
  return s;
}

void write_trial_records(std::ostream& os, std::span<const TrialResult> trials,
                         std::uint64_t first_trial_id) {
  os << "trial_id,stream,action,step,level,truncated\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    for (const Decision& d : trials[t].decisions) {
      os << first_trial_id + t << ',' << d.stream + 1 << ',' << to_string(d.action) << ','
         << d.step << ',' << d.level << ',' << (d.truncated ? 1 : 0) << '\n';
    }
  }
}

}  // namespace seqfdr
