#pragma once

// Qualitative features of an entanglement time series: plateaus, sudden death
// and revival.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace optoent {

struct FeatureThresholds {
  double zero = 1e-9;             // E_N below this counts as zero
  double revival = 1e-6;          // E_N above this after a zero interval is a revival
  double plateau_fraction = 0.2;  // trailing part of the window checked for drift
  double plateau_tol = 0.01;      // relative drift allowed on the plateau
};

struct TraceFeatures {
  double final_value = 0.0;
  double max_value = 0.0;
  double argmax_time = 0.0;
  double plateau_drift = 0.0;  // (max - min) / |final| over the trailing window
  bool plateau = false;
  std::vector<double> death_times;                    // downward zero crossings
  std::vector<std::pair<double, double>> zero_intervals;  // end is the revival time or the last sample
  // Start of a zero interval that lasts to the end of the window.
  std::optional<double> permanent_death;
  bool has_esd = false;
  bool has_revival = false;

  std::optional<double> first_death() const {
    return death_times.empty() ? std::nullopt : std::optional<double>(death_times.front());
  }
};

/// Analyses E_N samples. `exponent` is -ln 2 eta^- before clamping; crossings
/// are located by linear interpolation of it, so death times do not depend on
/// where the clamped curve happens to be sampled.
TraceFeatures analyze_trace(std::span<const double> times, std::span<const double> log_negativity,
                            std::span<const double> exponent, const FeatureThresholds& thresholds = {});

// Index of the largest value if it lies strictly inside the series.
std::optional<std::size_t> interior_maximum(std::span<const double> values);

}  // namespace optoent
