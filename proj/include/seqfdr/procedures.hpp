#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "seqfdr/error.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

/// Pull-based supplier of the standardized statistic of one stream, one
/// value per time step n = 1, 2, ... . Returns nullopt when exhausted.
class StreamSource {
 public:
  virtual ~StreamSource() = default;
  virtual std::optional<double> next() = 0;
};

using SourceList = std::vector<std::unique_ptr<StreamSource>>;

/// Replays a fixed path of standardized values.
class ReplaySource final : public StreamSource {
 public:
  explicit ReplaySource(std::vector<double> path) : path_(std::move(path)) {}
  std::optional<double> next() override {
    if (pos_ >= path_.size()) return std::nullopt;
    return path_[pos_++];
  }

 private:
  std::vector<double> path_;
  std::size_t pos_ = 0;
};

/// Raw observations of one stream.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual std::optional<Observation> next() = 0;
};

/// Accumulates sufficient statistics, evaluates the LLR from totals and
/// passes it through a standardizer.
class LlrStream final : public StreamSource {
 public:
  LlrStream(std::unique_ptr<ObservationSource> obs, SimpleModel model,
            std::shared_ptr<const Standardizer> phi);
  std::optional<double> next() override;

  double raw_statistic() const noexcept { return raw_; }

 private:
  std::unique_ptr<ObservationSource> obs_;
  SimpleModel model_;
  std::shared_ptr<const Standardizer> phi_;
  std::int64_t count_ = 0;
  std::int64_t trials_ = 0;
  std::int64_t steps_ = 0;
  double raw_ = 0.0;
};

enum class Action { Reject, Accept };
enum class Truth { Null, Alternative, Unlabeled };

const char* to_string(Action a);

struct Decision {
  std::size_t stream = 0;
  Action action = Action::Accept;
  std::int64_t step = 0;
  std::size_t level = 0;   // boundary index the statistic was tested against, 1-based
  bool truncated = false;  // forced acceptance at the horizon of a rejective run
};

struct TrialResult {
  std::vector<Decision> decisions;  // indexed by stream
  std::size_t R = 0;
  std::size_t V = 0;  // filled by tally()
  std::size_t W = 0;
  std::int64_t max_n = 0;
  std::int64_t total_samples = 0;

  /// Counts false rejections V and false acceptances W. Unlabeled streams
  /// contribute to R but to neither V nor W.
  void tally(std::span<const Truth> truth);
};

/// Snapshot at the start of each stage, for diagnostics and tests.
struct ProcedureState {
  std::vector<std::size_t> active;
  std::size_t rejected = 0;
  std::size_t accepted = 0;
  std::int64_t n = 0;
  std::size_t stage = 0;
};

using StageObserver = std::function<void(const ProcedureState&)>;

/// A source ran dry before the procedure finished.
class DataUnderrun : public DataError {
 public:
  DataUnderrun(const std::string& what, ProcedureState state)
      : DataError(what), state_(std::move(state)) {}
  const ProcedureState& state() const noexcept { return state_; }

 private:
  ProcedureState state_;
};

/// The open-ended run exceeded its step budget.
class GuardExceeded : public NumericalError {
 public:
  GuardExceeded(const std::string& what, ProcedureState state)
      : NumericalError(what), state_(std::move(state)) {}
  const ProcedureState& state() const noexcept { return state_; }

 private:
  ProcedureState state_;
};

/// Step-down procedure with acceptance and rejection boundaries on the
/// standardized scale. `max_steps` caps the cumulative sample index.
TrialResult run_open_ended(SourceList& sources, std::span<const double> a,
                           std::span<const double> b, std::int64_t max_steps,
                           const StageObserver& observer = {});

/// Rejective variant truncated at n_bar; undecided hypotheses are accepted
/// at the horizon and flagged truncated.
TrialResult run_rejective(SourceList& sources, std::span<const double> b, std::int64_t n_bar,
                          const StageObserver& observer = {});

struct MetricsSummary {
  double fdr = 0.0, fdr_se = 0.0;
  double fnr = 0.0, fnr_se = 0.0;
  std::optional<double> pfdr, pfdr_se;
  std::optional<double> pfnr, pfnr_se;
  double mean_max_n = 0.0, mean_max_n_se = 0.0;
  /// Average per-stream termination step (total_samples / J).
  double mean_stream_n = 0.0, mean_stream_n_se = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_trials_with_rejection = 0;
  std::size_t n_trials_with_acceptance = 0;
};

MetricsSummary summarize(std::span<const TrialResult> trials, std::span<const Truth> truth);

/// One row per stream decision: trial_id,stream,action,step,level,truncated.
void write_trial_records(std::ostream& os, std::span<const TrialResult> trials,
                         std::uint64_t first_trial_id = 0);

}  // namespace seqfdr
