#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "svi/config.hpp"

namespace svi {

struct ExperimentTable {
  std::string name;  // written as <scenario>.<name>.csv
  std::string csv;
};

struct ExperimentReport {
  std::string scenario;
  std::string kind;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> results;
  std::vector<ExperimentTable> tables;
  /// The experiment's own acceptance property (used by --self-test).
  bool self_check = true;
  std::string self_check_detail;
};

/// Dispatches on the experiment kind. `threads` caps workers and never
/// changes results.
ExperimentReport run_experiment(const ScenarioConfig& cfg, unsigned threads = 1);

std::string library_version();

/// Text report: header fields, results, then the canonical config after a
/// marker line so the run can be replayed.
std::string render_report(const ExperimentReport& report, const ScenarioConfig& cfg, double wall_seconds);

/// Writes <name>.report.txt and every <name>.<table>.csv into `dir`.
std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report, const ScenarioConfig& cfg,
                                                 const std::filesystem::path& dir, double wall_seconds);

/// Recovers the embedded config from a report and checks it against the
/// recorded hash; throws ConfigError on mismatch or a malformed report.
ScenarioConfig config_from_report(std::string_view report_text);

}  // namespace svi
