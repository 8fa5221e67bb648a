#include "optoent/presets.hpp"
#include "optoent/run_config.hpp"
#include "optoent/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

using namespace optoent;

namespace {

std::string error_key(const std::string& text) {
  try {
    parse_config(text).validate();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

RunConfig small_run() {
  RunConfig c = parse_config(R"(
    name = small
    E_over_kappa = 3e5
    detunings = -1, 1
    samples = 7
    t_end = 6
  )");
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("parsing applies keys in order and skips comments") {
  const auto c = parse_config("# comment\nE_over_kappa = 2e6  # trailing\n\nE_over_kappa = 4e5\nmode = noise-free\n");
  CHECK(c.E_over_kappa == 4e5);
  CHECK(c.mode == Mode::noise_free);
  CHECK(c.detunings == std::vector<double>{-1.0});
}

TEST_CASE("errors name the offending key") {
  CHECK(error_key("bogus = 1") == "bogus");
  CHECK(error_key("E_over_kappa = lots") == "E_over_kappa");
  CHECK(error_key("E_over_kappa = -3") == "E_over_kappa");
  CHECK(error_key("samples = 0") == "samples");
  CHECK(error_key("mode = quantum") == "mode");
  CHECK(error_key("drive = square") == "drive");
  CHECK(error_key("detunings = ") == "detunings");
  CHECK(error_key("grid_dt = 0") == "grid_dt");
  CHECK(error_key("sweep = intensity\nintensity_steps = 0") == "intensity_steps");
  CHECK(error_key("drive = pulse\nmode = compare") == "drive");
  CHECK(error_key("omega_m_over_gamma_m = 0") == "omega_m_over_gamma_m");
  CHECK(error_key("variants = full@-1") == "variants");
  CHECK(error_key("plateau_fraction = 2") == "plateau_fraction");
  CHECK(error_key("E_over_kappa = 3e5") == "<none>");
  CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
}

TEST_CASE("axis values") {
  const AxisRange lin{-2.0, 2.0, 5, false};
  CHECK(lin.values() == std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0});
  const auto lg = AxisRange{1e4, 1e7, 4, true}.values();
  REQUIRE(lg.size() == 4);
  CHECK(lg[1] == doctest::Approx(1e5).epsilon(1e-12));
  CHECK(lg.back() == doctest::Approx(1e7).epsilon(1e-12));
  CHECK(AxisRange{3.0, 4.0, 1, false}.values() == std::vector<double>{3.0});
}

TEST_CASE("run parameters are ratios to kappa") {
  const auto c = parse_config("omega_m_over_kappa = 2.5\nomega_m_over_gamma_m = 1e7\nn_m = 4\n");
  const auto p = c.params(-1.0, 4.0);
  CHECK(p.kappa == 1.0);
  CHECK(p.delta0 == -2.5);
  CHECK(p.gamma_m == doctest::Approx(2.5e-7).epsilon(1e-15));
  CHECK(p.reservoir_occupation() == 4.0);
  const auto pulse = parse_config("drive = pulse\npulse_width_over_omega_m = 1\nE_over_kappa = 2e6\n");
  const DriveProfile drive = pulse.drive_profile();
  const auto* g = std::get_if<GaussianPulse>(&drive);
  REQUIRE(g != nullptr);
  CHECK(g->width == 2.5);
  CHECK(g->amplitude == 2e6);
}

TEST_CASE("presets carry the reference parameters") {
  const auto names = preset_names();
  CHECK(names.size() == 16);
  for (const auto& n : names) {
    const auto c = load_preset(n);
    CHECK(c.name == n);
    CHECK_NOTHROW(c.validate());
    CHECK(c.g_over_kappa == 1e-6);
    CHECK(c.omega_m_over_kappa == 2.5);
    CHECK(c.omega_m_over_gamma_m == 1e7);
  }
  const auto a = load_preset("fig2a");
  CHECK(a.E_over_kappa == 3e5);
  CHECK(a.n_m == 0.0);
  CHECK(a.t_end == 15.0);
  CHECK(a.detunings == std::vector<double>{-0.5, -1.0, -1.5, -2.0});
  CHECK(a.mode == Mode::full);
  CHECK(load_preset("fig2b").E_over_kappa == 2e6);
  CHECK(load_preset("fig3a").detunings == std::vector<double>{0.5, 1.0, 1.5, 2.0});
  const auto five = load_preset("fig5a");
  CHECK(five.drive == DriveKind::pulse);
  CHECK(five.pulse_width_over_omega_m == 1.0);
  const auto four = load_preset("fig4a");
  REQUIRE(four.variants.size() == 3);
  CHECK(four.variants[2].n_m == 1e4);
  CHECK(load_preset("figC1b").mode == Mode::noise_free);
  CHECK(load_preset("figC1b").E_over_kappa == 2e6);
  try {
    load_preset("fig9");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "preset");
  }
}

TEST_CASE("describe lists every settable key") {
  const auto entries = describe(RunConfig{});
  std::set<std::string> keys;
  for (const auto& [k, v] : entries) keys.insert(k);
  CHECK(keys.size() == entries.size());
  // Round trip: every described value parses back to the same description.
  RunConfig round;
  for (const auto& [k, v] : entries) {
    if (k == "n_th" || k == "variants") continue;
    apply_setting(round, k, v);
  }
  CHECK(describe(round) == entries);
}

TEST_CASE("zero drive gives zero entanglement") {
  auto c = small_run();
  c.E_over_kappa = 0.0;
  const auto r = execute(c);
  for (const auto& curve : r.curves) {
    for (double e : curve.column("E_N")) CHECK(e == 0.0);
  }
}

TEST_CASE("CSV output is deterministic and thread independent") {
  auto c = small_run();
  const auto first = execute(c);
  c.threads = 3;
  const auto second = execute(c);
  REQUIRE(first.curves.size() == 2);
  for (std::size_t i = 0; i < first.curves.size(); ++i) {
    CHECK(format_csv(first.curves[i]) == format_csv(second.curves[i]));
  }
  CHECK(format_combined_csv(first) == format_combined_csv(second));
  const std::string csv = format_csv(first.curves[0]);
  CHECK(csv.rfind("t_kappa,E_N,exponent,mean_xc,mean_pc,mean_xm,mean_pm,cavity_fluctuation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
}

TEST_CASE("manifest records the resolved configuration") {
  const auto r = execute(small_run());
  const auto m = nlohmann::json::parse(format_manifest(r, {"a.csv"}));
  CHECK(m["version"] == kToolVersion);
  for (const auto& [k, v] : describe(r.config)) CHECK(m["config"].contains(k));
  CHECK(m["curves"].size() == 2);
  CHECK(m["curves"][0]["params"].contains("gamma_m"));
  CHECK(m["max_convergence_delta"].get<double>() < 1e-3);

  const auto dir = std::filesystem::temp_directory_path() / "optoent_manifest_test";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(r, dir);
  CHECK(files.size() == 5);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweeps produce one row per axis point") {
  auto c = small_run();
  c.sweep = SweepKind::intensity;
  c.intensity_axis = {1e5, 4e5, 3, false};
  c.mode = Mode::compare;
  c.detunings = {1.0};
  const auto r = execute(c);
  REQUIRE(r.curves.size() >= 1);
  const auto& curve = r.curves[0];
  CHECK(curve.rows.size() == 3);
  CHECK(curve.column("E_over_kappa") == std::vector<double>{1e5, 2.5e5, 4e5});
  for (double s : curve.column("stable")) CHECK(s == 1.0);
  for (double e : curve.column("E_N_baseline")) CHECK(std::isfinite(e));
  CHECK_THROWS_AS(curve.column("nope"), std::out_of_range);
}
