#pragma once

// Executes a RunConfig: trajectories, sweeps and stability maps, plus CSV,
// manifest and feature-summary output.

#include "optoent/run_config.hpp"
#include "optoent/trace_features.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optoent {

inline constexpr const char* kToolVersion = "0.1.0";

struct Curve {
  std::string label;
  std::string stem;  // output file name without extension
  double delta0_over_omega_m = 0.0;
  std::optional<Variant> variant;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::optional<TraceFeatures> trace_features;
  double max_convergence_delta = 0.0;
  std::vector<std::string> summary;  // human-readable feature lines

  // Values of one column; throws std::out_of_range for unknown names.
  std::vector<double> column(const std::string& name) const;
};

struct RunResult {
  RunConfig config;
  std::vector<Curve> curves;
  std::vector<std::string> summary;  // cross-curve feature lines
  std::vector<std::string> warnings;
};

/// Runs every curve of the configuration. Points are spread over
/// config.threads workers; results are assembled in axis order so the output
/// does not depend on the thread count. Propagates ConvergenceError.
RunResult execute(const RunConfig& config);

std::string format_csv(const Curve& curve);
std::string format_combined_csv(const RunResult& result);
std::string format_manifest(const RunResult& result, const std::vector<std::string>& files);
std::string format_summary(const RunResult& result);

// Writes <dir>/<stem>.csv per curve, combined.csv, summary.txt and
// manifest.json. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace optoent
