#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqfdr/error.hpp"
#include "seqfdr/experiment.hpp"
#include "seqfdr/fixed_sample.hpp"
#include "seqfdr/yellowcard.hpp"

namespace seqfdr::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit code for an error class: 2 config/usage, 3 data, 4 numerical.
int exit_code(ErrorKind kind);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> versions;
  std::map<std::string, double> timings;  // seconds per phase; written separately

  nlohmann::json to_json() const;  // without timings
};

// Config readers. Field errors are reported as ConfigError with a dotted path.
SimulationConfig simulation_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& c);
FssConfig fss_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FssConfig& c);

nlohmann::json to_json(const MetricsSummary& m);

/// Entry point of the `seqfdr` tool.
int main(int argc, char** argv);

}  // namespace seqfdr::cli
