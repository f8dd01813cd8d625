#pragma once

// Adverse-event report monitoring on a drug table: one stream per drug,
// yearly (amnesia, total) report counts, conditional-binomial SPRTs.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqfdr/procedures.hpp"
#include "seqfdr/sprt.hpp"

namespace seqfdr {

struct DrugRecord {
  std::string name;
  std::int64_t amnesia_count = 0;
  std::int64_t other_count = 0;
  double years = 1.0;
  int cluster = 0;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct DrugTable {
  std::vector<DrugRecord> records;
  std::vector<RejectedRow> rejected;
};

/// CSV with header name,amnesia_count,other_count,years,cluster (any column
/// order). Rows that parse but violate the record invariants are collected
/// in `rejected`; malformed rows and missing columns throw DataError.
DrugTable load_drug_table(const std::string& path);
DrugTable parse_drug_table(std::istream& is, const std::string& source = "<input>");

struct Rates {
  double amnesia = 0.0;  // per year
  double other = 0.0;
};

/// ((count + 1) / years) for both report kinds.
Rates derive_rates(const DrugRecord& r);
double amnesia_fraction(const Rates& rates);
double amnesia_fraction(const DrugRecord& r);

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// 50th and 90th percentiles of the amnesia fraction over all records.
std::pair<double, double> thresholds(const std::vector<DrugRecord>& records);

struct YellowCardConfig {
  std::vector<DrugRecord> records;
  double q1 = 0.05;
  double q2 = 0.15;
  std::optional<double> p_h;  // default: thresholds() on the full table
  std::optional<double> p_g;
  std::uint64_t seed = 1;
  std::size_t top_n = 1800;
  WaldOptions wald{};
  /// Rescale every monitored drug to p = p_h (keeping its total rate).
  bool all_null = false;
  std::int64_t max_steps = 100000;
};

struct MonitoringRow {
  std::string drug;
  Action action = Action::Accept;
  std::int64_t step = 0;
  std::size_t level = 0;
  bool truncated = false;
};

struct MonitoringResult {
  std::vector<MonitoringRow> rows;  // accepts first, then by termination step
  double p_h = 0.0, p_g = 0.0;
  std::map<int, double> rho_of_cluster;
  std::vector<double> alpha, beta;
  std::vector<Truth> truth;  // per monitored drug, in monitoring order
  std::vector<std::string> monitored;
  TrialResult trial;
};

MonitoringResult run_monitoring(const YellowCardConfig& cfg);

/// drug,action,termination_step,termination_level,truncated_flag
void write_monitoring_csv(std::ostream& os, const MonitoringResult& r);
nlohmann::json monitoring_manifest(const YellowCardConfig& cfg, const MonitoringResult& r);

}  // namespace seqfdr
