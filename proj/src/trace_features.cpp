#include "optoent/trace_features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace optoent {

namespace {

double crossing(double t0, double t1, double y0, double y1) {
  if (y0 == y1) return t1;
  return t0 + (t1 - t0) * y0 / (y0 - y1);
}

}  // namespace

TraceFeatures analyze_trace(std::span<const double> times, std::span<const double> log_negativity,
                            std::span<const double> exponent, const FeatureThresholds& thresholds) {
  const std::size_t n = times.size();
  if (log_negativity.size() != n || exponent.size() != n) {
    throw std::invalid_argument("analyze_trace: series lengths differ");
  }
  TraceFeatures f;
  if (n == 0) return f;

  f.final_value = log_negativity.back();
  const auto top = std::max_element(log_negativity.begin(), log_negativity.end());
  f.max_value = *top;
  f.argmax_time = times[static_cast<std::size_t>(top - log_negativity.begin())];

  const double window_start = times.back() - thresholds.plateau_fraction * (times.back() - times.front());
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    if (times[i] < window_start) continue;
    lo = std::min(lo, log_negativity[i]);
    hi = std::max(hi, log_negativity[i]);
  }
  if (std::abs(f.final_value) > thresholds.zero) {
    f.plateau_drift = (hi - lo) / std::abs(f.final_value);
  } else {
    f.plateau_drift = hi > thresholds.zero ? INFINITY : 0.0;
  }
  f.plateau = f.plateau_drift <= thresholds.plateau_tol;

  // Entanglement must have been present before it can die.
  bool alive = false;
  std::optional<double> dead_since;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = log_negativity[i] > thresholds.zero;
    if (!dead_since) {
      if (positive) {
        alive = true;
      } else if (alive) {
        dead_since = i > 0 ? crossing(times[i - 1], times[i], exponent[i - 1], exponent[i]) : times[i];
        f.death_times.push_back(*dead_since);
      }
    } else if (log_negativity[i] > thresholds.revival) {
      const double back = crossing(times[i - 1], times[i], exponent[i - 1], exponent[i]);
      f.zero_intervals.emplace_back(*dead_since, back);
      f.has_revival = true;
      dead_since.reset();
    }
  }
  if (dead_since) {
    f.zero_intervals.emplace_back(*dead_since, times.back());
    f.permanent_death = dead_since;
  }
  f.has_esd = !f.death_times.empty();
  return f;
}

std::optional<std::size_t> interior_maximum(std::span<const double> values) {
  if (values.size() < 3) return std::nullopt;
  const auto idx = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
  if (idx == 0 || idx + 1 == values.size()) return std::nullopt;
  return idx;
}

}  // namespace optoent
