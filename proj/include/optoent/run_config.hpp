#pragma once

// Flat key = value run configuration shared by the CLI and the figure presets.
// Physical inputs are ratios to kappa, so kappa is fixed to 1.

#include "optoent/core_model.hpp"
#include "optoent/entanglement.hpp"
#include "optoent/trace_features.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace optoent {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Mode { full, noise_free, baseline, compare };
enum class SweepKind { none, detuning, intensity, stability_map };
enum class DriveKind { cw, pulse };

std::string_view to_string(Mode mode);
std::string_view to_string(SweepKind sweep);
std::string_view to_string(DriveKind drive);
Mode parse_mode(std::string_view text);  // throws ConfigError keyed "mode"

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 1;
  bool log = false;

  // `steps` points from min to max inclusive (a single point is min).
  std::vector<double> values() const;
};

// One curve flavour: a mode at a given initial mechanical occupation.
struct Variant {
  Mode mode = Mode::full;
  double n_m = 0.0;

  std::string label() const;
};

struct RunConfig {
  std::string name = "run";

  double g_over_kappa = 1e-6;
  double omega_m_over_kappa = 2.5;
  double omega_m_over_gamma_m = 1e7;
  double E_over_kappa = 3e5;
  std::vector<double> detunings{-1.0};  // delta0 / omega_m
  DriveKind drive = DriveKind::cw;
  double pulse_width_over_omega_m = 1.0;
  double n_m = 0.0;
  std::optional<double> n_th;

  double t_end = 15.0;
  std::size_t samples = 600;
  Mode mode = Mode::full;
  std::vector<Variant> variants;  // empty: a single variant {mode, n_m}

  SweepKind sweep = SweepKind::none;
  AxisRange detuning_axis{-2.0, 2.0, 41, false};  // delta0 / omega_m
  AxisRange intensity_axis{1e5, 2e6, 20, false};  // E / kappa

  double grid_k_step = kDefaultKStep;
  double grid_dt = kDefaultNoiseStep;
  double convergence_tol = 1e-3;
  std::uint64_t seed = 1;
  FeatureThresholds thresholds;
  std::string out = "out";
  unsigned threads = 0;

  SystemParams params(double delta0_over_omega_m, double n_m_override) const;
  DriveProfile drive_profile(double E_over_kappa_value) const;
  DriveProfile drive_profile() const { return drive_profile(E_over_kappa); }
  std::vector<Variant> resolved_variants() const;
  QuadratureGrid grid() const { return {grid_k_step, grid_dt}; }

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Applies one key = value setting; unknown keys and malformed values throw.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Parses "key = value" lines; '#' starts a comment. Later keys override earlier ones.
RunConfig parse_config(std::string_view text, RunConfig base = {});

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

// Every key with its resolved value, in a stable order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

}  // namespace optoent
