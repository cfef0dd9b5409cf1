#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zeno_harness/config.hpp"
#include "zeno_harness/output.hpp"

namespace zeno::harness {

struct RunResult {
  Json payload = Json::object();
  Json flags = Json::object();
  std::vector<CsvTable> tables;
  double wall_seconds = 0.0;
};

/// Dispatches to the experiment kind. Library errors propagate.
RunResult run_experiment(const ExperimentConfig& config);

/// Writes <kind>-<hash>.json plus one CSV (and optional .dat) per table.
/// Returns the written paths in order.
std::vector<std::filesystem::path> write_run(const ExperimentConfig& config, const RunResult& result);

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitValidation = 2, kExitNumerical = 3, kExitGuard = 4 };

/// Machine-readable error object for the exception currently being handled,
/// together with the exit code it maps to.
std::pair<int, Json> describe_current_exception();

}  // namespace zeno::harness
