#include "optoent/noise_covariance.hpp"
#include "optoent/presets.hpp"
#include "optoent/run_config.hpp"
#include "optoent/runner.hpp"
#include "optoent/validate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

using namespace optoent;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> grid_dt;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<unsigned> threads;
  std::vector<std::string> settings;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "Output directory; results go to <out>/<name>");
  app->add_option("--grid-dt", o.grid_dt, "Noise quadrature step in 1/kappa");
  app->add_option("--samples", o.samples, "Time samples per trajectory");
  app->add_option("--seed", o.seed, "Seed for Monte Carlo checks");
  app->add_option("--mode", o.mode, "full | noise-free | baseline | compare");
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app->add_option("--set", o.settings, "Extra key=value setting, repeatable");
}

RunConfig apply(RunConfig c, const Overrides& o) {
  if (!o.config.empty()) c = load_config_file(o.config, std::move(c));
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.out) c.out = *o.out;
  if (o.grid_dt) apply_setting(c, "grid_dt", fmt::format("{:.17g}", *o.grid_dt));
  if (o.samples) c.samples = *o.samples;
  if (o.seed) c.seed = *o.seed;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.threads) c.threads = *o.threads;
  return c;
}

int run_and_write(const RunConfig& config) {
  const auto result = execute(config);
  const auto dir = std::filesystem::path(config.out) / config.name;
  const auto files = write_outputs(result, dir);
  std::fputs(format_summary(result).c_str(), stdout);
  fmt::print("wrote {} files to {}\n", files.size(), dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-mechanics entanglement dynamics: trajectories, sweeps and baseline comparison"};
  app.require_subcommand(1);

  Overrides run_o, fig_o, sweep_o;
  auto* run = app.add_subcommand("run", "Run one configuration");
  add_overrides(run, run_o);

  auto* figure = app.add_subcommand("figure", "Reproduce a figure preset");
  std::string preset;
  bool list = false;
  figure->add_option("name", preset, "Preset name");
  figure->add_flag("--list", list, "List available presets");
  add_overrides(figure, fig_o);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  std::optional<std::string> sweep_kind;
  sweep->add_option("--sweep", sweep_kind, "detuning | intensity | stability-map");
  add_overrides(sweep, sweep_o);

  auto* validate = app.add_subcommand("validate", "Run the built-in oracle checks");
  std::optional<double> val_dt;
  std::uint64_t val_seed = 1;
  std::size_t val_samples = 10000;
  validate->add_option("--grid-dt", val_dt, "Noise quadrature step in 1/kappa");
  validate->add_option("--seed", val_seed, "Monte Carlo seed");
  validate->add_option("--samples", val_samples, "Monte Carlo samples (at least 1e4)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_and_write(apply(RunConfig{}, run_o));
    if (*figure) {
      if (list || preset.empty()) {
        for (const auto& n : preset_names()) fmt::print("{}\n", n);
        return preset.empty() && !list ? 1 : 0;
      }
      return run_and_write(apply(load_preset(preset), fig_o));
    }
    if (*sweep) {
      RunConfig c = apply(RunConfig{}, sweep_o);
      if (sweep_kind) apply_setting(c, "sweep", *sweep_kind);
      if (c.sweep == SweepKind::none) throw ConfigError("sweep", "choose detuning, intensity or stability-map");
      return run_and_write(c);
    }
    if (*validate) {
      ValidateOptions o;
      if (val_dt) o.grid.noise_step = *val_dt;
      o.seed = val_seed;
      o.mc_samples = val_samples;
      bool ok = true;
      for (const auto& check : run_validation(o)) {
        fmt::print("{}\n", format_check(check));
        ok = ok && check.passed;
      }
      fmt::print("{}\n", ok ? "all checks passed" : "some checks failed");
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const ConvergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
