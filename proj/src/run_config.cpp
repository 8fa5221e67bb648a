#include "optoent/run_config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace optoent {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key), fmt::format("expected a number, got '{}'", text));
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key), fmt::format("expected a non-negative integer, got '{}'", text));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key), fmt::format("expected true or false, got '{}'", text));
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (auto item : split(text, ',')) out.push_back(parse_double(key, item));
  return out;
}

Variant parse_variant(std::string_view text) {
  const auto at = text.find('@');
  Variant v;
  v.mode = parse_mode(trim(text.substr(0, at)));
  if (v.mode == Mode::baseline || v.mode == Mode::compare) {
    throw ConfigError("variants", "variants take full or noise-free modes");
  }
  if (at != std::string_view::npos) v.n_m = parse_double("variants", text.substr(at + 1));
  return v;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt_double(xs[i]);
  return s;
}

void check_axis(const AxisRange& axis, const char* prefix) {
  const std::string p(prefix);
  if (axis.steps < 1) throw ConfigError(p + "_steps", "must be at least 1");
  if (axis.steps > 1 && !(axis.max > axis.min)) throw ConfigError(p + "_max", "range is empty");
  if (axis.log && !(axis.min > 0.0)) throw ConfigError(p + "_min", "log axis needs a positive minimum");
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full: return "full";
    case Mode::noise_free: return "noise-free";
    case Mode::baseline: return "baseline";
    case Mode::compare: return "compare";
  }
  return "?";
}

std::string_view to_string(SweepKind sweep) {
  switch (sweep) {
    case SweepKind::none: return "none";
    case SweepKind::detuning: return "detuning";
    case SweepKind::intensity: return "intensity";
    case SweepKind::stability_map: return "stability-map";
  }
  return "?";
}

std::string_view to_string(DriveKind drive) { return drive == DriveKind::cw ? "cw" : "pulse"; }

Mode parse_mode(std::string_view text) {
  text = trim(text);
  if (text == "full") return Mode::full;
  if (text == "noise-free") return Mode::noise_free;
  if (text == "baseline") return Mode::baseline;
  if (text == "compare") return Mode::compare;
  throw ConfigError("mode", fmt::format("unknown mode '{}' (full|noise-free|baseline|compare)", text));
}

std::vector<double> AxisRange::values() const {
  std::vector<double> out(steps);
  if (steps == 1) {
    out[0] = min;
    return out;
  }
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
    out[i] = log ? min * std::pow(max / min, f) : min + f * (max - min);
  }
  out.back() = max;
  return out;
}

std::string Variant::label() const { return fmt::format("{}@n_m={:g}", to_string(mode), n_m); }

SystemParams RunConfig::params(double delta0_over_omega_m, double n_m_override) const {
  SystemParams p;
  p.kappa = 1.0;
  p.g = g_over_kappa;
  p.omega_m = omega_m_over_kappa;
  p.gamma_m = omega_m_over_kappa / omega_m_over_gamma_m;
  p.delta0 = delta0_over_omega_m * omega_m_over_kappa;
  p.n_m = n_m_override;
  p.n_th = n_th;
  p.n_c = 0.0;
  return p;
}

DriveProfile RunConfig::drive_profile(double E) const {
  if (drive == DriveKind::cw) return CwDrive{E};
  return GaussianPulse{E, pulse_width_over_omega_m * omega_m_over_kappa};
}

std::vector<Variant> RunConfig::resolved_variants() const {
  if (!variants.empty()) return variants;
  return {Variant{mode == Mode::noise_free ? Mode::noise_free : Mode::full, n_m}};
}

void RunConfig::validate() const {
  if (name.empty()) throw ConfigError("name", "must not be empty");
  if (!(g_over_kappa >= 0.0)) throw ConfigError("g_over_kappa", "must be non-negative");
  if (!(omega_m_over_kappa > 0.0)) throw ConfigError("omega_m_over_kappa", "must be positive");
  if (!(omega_m_over_gamma_m > 0.0)) throw ConfigError("omega_m_over_gamma_m", "must be positive");
  if (!(E_over_kappa >= 0.0)) throw ConfigError("E_over_kappa", "must be non-negative");
  if (detunings.empty()) throw ConfigError("detunings", "needs at least one value");
  if (drive == DriveKind::pulse && !(pulse_width_over_omega_m > 0.0)) {
    throw ConfigError("pulse_width_over_omega_m", "must be positive for pulses");
  }
  if (!(n_m >= 0.0)) throw ConfigError("n_m", "must be non-negative");
  if (n_th && !(*n_th >= 0.0)) throw ConfigError("n_th", "must be non-negative");
  if (!(t_end >= 0.0)) throw ConfigError("t_end", "must be non-negative");
  if (samples < 1) throw ConfigError("samples", "must be at least 1");
  if (!(grid_k_step > 0.0)) throw ConfigError("grid_k_step", "must be positive");
  if (!(grid_dt >= grid_k_step)) throw ConfigError("grid_dt", "must be positive and no finer than grid_k_step");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol", "must be positive");
  for (const auto& v : variants) {
    if (!(v.n_m >= 0.0)) throw ConfigError("variants", "occupation must be non-negative");
  }
  if (sweep == SweepKind::detuning || sweep == SweepKind::stability_map) check_axis(detuning_axis, "detuning");
  if (sweep == SweepKind::intensity || sweep == SweepKind::stability_map) check_axis(intensity_axis, "intensity");
  if (sweep == SweepKind::intensity && intensity_axis.min < 0.0) throw ConfigError("intensity_min", "must be non-negative");
  if ((mode == Mode::baseline || mode == Mode::compare || sweep == SweepKind::stability_map) &&
      drive != DriveKind::cw) {
    throw ConfigError("drive", "the steady-state baseline needs a cw drive");
  }
  if (!(thresholds.plateau_fraction > 0.0 && thresholds.plateau_fraction <= 1.0)) {
    throw ConfigError("plateau_fraction", "must lie in (0, 1]");
  }
  params(detunings.front(), n_m).validate();
}

void apply_setting(RunConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key(trim(key_in));
  const std::string_view value = trim(value_in);
  if (value.empty()) throw ConfigError(key, "missing value");
  if (key == "name") c.name = std::string(value);
  else if (key == "g_over_kappa") c.g_over_kappa = parse_double(key, value);
  else if (key == "omega_m_over_kappa") c.omega_m_over_kappa = parse_double(key, value);
  else if (key == "omega_m_over_gamma_m") c.omega_m_over_gamma_m = parse_double(key, value);
  else if (key == "E_over_kappa") c.E_over_kappa = parse_double(key, value);
  else if (key == "detunings") c.detunings = parse_list(key, value);
  else if (key == "drive") {
    if (value == "cw") c.drive = DriveKind::cw;
    else if (value == "pulse") c.drive = DriveKind::pulse;
    else throw ConfigError(key, fmt::format("unknown drive '{}' (cw|pulse)", value));
  }
  else if (key == "pulse_width_over_omega_m") c.pulse_width_over_omega_m = parse_double(key, value);
  else if (key == "n_m") c.n_m = parse_double(key, value);
  else if (key == "n_th") c.n_th = parse_double(key, value);
  else if (key == "t_end") c.t_end = parse_double(key, value);
  else if (key == "samples") c.samples = parse_unsigned(key, value);
  else if (key == "mode") c.mode = parse_mode(value);
  else if (key == "variants") {
    c.variants.clear();
    for (auto item : split(value, ',')) c.variants.push_back(parse_variant(item));
  }
  else if (key == "sweep") {
    if (value == "none") c.sweep = SweepKind::none;
    else if (value == "detuning") c.sweep = SweepKind::detuning;
    else if (value == "intensity") c.sweep = SweepKind::intensity;
    else if (value == "stability-map") c.sweep = SweepKind::stability_map;
    else throw ConfigError(key, fmt::format("unknown sweep '{}' (none|detuning|intensity|stability-map)", value));
  }
  else if (key == "detuning_min") c.detuning_axis.min = parse_double(key, value);
  else if (key == "detuning_max") c.detuning_axis.max = parse_double(key, value);
  else if (key == "detuning_steps") c.detuning_axis.steps = parse_unsigned(key, value);
  else if (key == "intensity_min") c.intensity_axis.min = parse_double(key, value);
  else if (key == "intensity_max") c.intensity_axis.max = parse_double(key, value);
  else if (key == "intensity_steps") c.intensity_axis.steps = parse_unsigned(key, value);
  else if (key == "intensity_log") c.intensity_axis.log = parse_bool(key, value);
  else if (key == "grid_k_step") c.grid_k_step = parse_double(key, value);
  else if (key == "grid_dt") c.grid_dt = parse_double(key, value);
  else if (key == "convergence_tol") c.convergence_tol = parse_double(key, value);
  else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "esd_zero") c.thresholds.zero = parse_double(key, value);
  else if (key == "revival_threshold") c.thresholds.revival = parse_double(key, value);
  else if (key == "plateau_fraction") c.thresholds.plateau_fraction = parse_double(key, value);
  else if (key == "plateau_tol") c.thresholds.plateau_tol = parse_double(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "threads") c.threads = static_cast<unsigned>(parse_unsigned(key, value));
  else throw ConfigError(key, "unknown key");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", fmt::format("line {}: expected key = value, got '{}'", line_no, line));
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  std::string variants;
  for (const auto& v : c.resolved_variants()) {
    variants += (variants.empty() ? "" : ",") + fmt::format("{}@{}", to_string(v.mode), fmt_double(v.n_m));
  }
  return {
      {"name", c.name},
      {"g_over_kappa", fmt_double(c.g_over_kappa)},
      {"omega_m_over_kappa", fmt_double(c.omega_m_over_kappa)},
      {"omega_m_over_gamma_m", fmt_double(c.omega_m_over_gamma_m)},
      {"E_over_kappa", fmt_double(c.E_over_kappa)},
      {"detunings", join(c.detunings)},
      {"drive", std::string(to_string(c.drive))},
      {"pulse_width_over_omega_m", fmt_double(c.pulse_width_over_omega_m)},
      {"n_m", fmt_double(c.n_m)},
      {"n_th", c.n_th ? fmt_double(*c.n_th) : "n_m"},
      {"t_end", fmt_double(c.t_end)},
      {"samples", std::to_string(c.samples)},
      {"mode", std::string(to_string(c.mode))},
      {"variants", variants},
      {"sweep", std::string(to_string(c.sweep))},
      {"detuning_min", fmt_double(c.detuning_axis.min)},
      {"detuning_max", fmt_double(c.detuning_axis.max)},
      {"detuning_steps", std::to_string(c.detuning_axis.steps)},
      {"intensity_min", fmt_double(c.intensity_axis.min)},
      {"intensity_max", fmt_double(c.intensity_axis.max)},
      {"intensity_steps", std::to_string(c.intensity_axis.steps)},
      {"intensity_log", c.intensity_axis.log ? "true" : "false"},
      {"grid_k_step", fmt_double(c.grid_k_step)},
      {"grid_dt", fmt_double(c.grid_dt)},
      {"convergence_tol", fmt_double(c.convergence_tol)},
      {"seed", std::to_string(c.seed)},
      {"esd_zero", fmt_double(c.thresholds.zero)},
      {"revival_threshold", fmt_double(c.thresholds.revival)},
      {"plateau_fraction", fmt_double(c.thresholds.plateau_fraction)},
      {"plateau_tol", fmt_double(c.thresholds.plateau_tol)},
      {"out", c.out},
      {"threads", std::to_string(c.threads)},
  };
}

}  // namespace optoent
