#include "optoent/runner.hpp"

#include "optoent/baseline.hpp"
#include "optoent/entanglement.hpp"
#include "optoent/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace optoent {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kTraceColumns = {"t_kappa", "E_N",     "exponent", "mean_xc",
                                                "mean_pc", "mean_xm", "mean_pm",  "cavity_fluctuation"};
const std::vector<std::string> kQuantumColumns = {"E_N", "exponent", "cavity_fluctuation"};
const std::vector<std::string> kBaselineColumns = {"s1",     "s2",       "stable",       "eigen_stable",
                                                   "bistable", "E_N_baseline", "cavity_fluctuation_baseline"};
const std::vector<std::string> kMapColumns = {"delta0_over_omega_m", "E_over_kappa", "s1",       "s2",
                                              "stable",              "eigen_stable", "agree",    "drift_eigen_max_real",
                                              "bistable",            "G",            "Delta"};

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.';
    if (keep) out += ch;
    else if (out.empty() || out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

bool quantum_mode(Mode m) { return m != Mode::baseline; }
bool baseline_mode(Mode m) { return m == Mode::baseline || m == Mode::compare; }

EvolveOptions evolve_options(const RunConfig& c, Mode mode) {
  EvolveOptions o;
  o.grid = c.grid();
  o.include_noise = mode != Mode::noise_free;
  o.convergence_tol = c.convergence_tol;
  return o;
}

struct QuantumPoint {
  double en = kNaN, exponent = kNaN, ncav = kNaN, delta = 0.0;
};

struct BaselinePoint {
  double s1 = kNaN, s2 = kNaN, en = kNaN, ncav = kNaN;
  bool stable = false, eigen_stable = false, bistable = false;
};

QuantumPoint quantum_point(const RunConfig& c, const Variant& v, double ratio, double E) {
  const auto p = c.params(ratio, v.n_m);
  const auto s = evolve_state(p, c.drive_profile(E), c.t_end, evolve_options(c, v.mode));
  return {log_negativity(s.covariance), negativity_exponent(s.covariance), cavity_fluctuation_number(s.covariance),
          s.convergence_delta};
}

BaselinePoint baseline_point(const RunConfig& c, double ratio, double n_m, double E) {
  const auto p = c.params(ratio, n_m);
  const auto st = classical_steady_state(p, E);
  const auto rh = routh_hurwitz(p, st);
  BaselinePoint b;
  b.s1 = rh.s1;
  b.s2 = rh.s2;
  b.stable = rh.stable;
  b.eigen_stable = rh.eigen_stable;
  b.bistable = st.bistable;
  if (rh.stable) {
    const CovMatrix4 v(solve_lyapunov(drift_matrix(p, st), diffusion_matrix(p)));
    b.en = log_negativity(v);
    b.ncav = cavity_fluctuation_number(v);
  }
  return b;
}

std::string variant_tag(const Variant& v) { return fmt::format("{} n_m={:g}", to_string(v.mode), v.n_m); }

// ---- time traces ---------------------------------------------------------

Curve trace_curve(const RunConfig& c, double ratio, const Variant& v) {
  Curve curve;
  curve.label = fmt::format("delta0={:g}w {}", ratio, variant_tag(v));
  curve.stem = sanitize(curve.label);
  curve.delta0_over_omega_m = ratio;
  curve.variant = v;
  curve.columns = kTraceColumns;
  const auto times = uniform_times(c.t_end, c.samples);
  const auto trace =
      compute_trace(c.params(ratio, v.n_m), c.drive_profile(), times, evolve_options(c, v.mode), c.threads);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vec4& m = trace.means[i];
    curve.rows.push_back({times[i], trace.log_negativity[i], trace.exponent[i], m(0), m(1), m(2), m(3),
                          trace.cavity_fluctuation[i]});
  }
  curve.max_convergence_delta = trace.max_convergence_delta;
  const auto f = analyze_trace(trace.times, trace.log_negativity, trace.exponent, c.thresholds);
  curve.trace_features = f;
  curve.summary.push_back(fmt::format("final E_N = {:.6g}, max {:.6g} at kt = {:.4g}", f.final_value, f.max_value,
                                      f.argmax_time));
  curve.summary.push_back(fmt::format("plateau drift over last {:g}% = {:.3g} ({})",
                                      100.0 * c.thresholds.plateau_fraction, f.plateau_drift,
                                      f.plateau ? "steady" : "not steady"));
  if (f.has_esd) {
    std::string intervals;
    for (const auto& [a, b] : f.zero_intervals) intervals += fmt::format(" [{:.4g}, {:.4g}]", a, b);
    curve.summary.push_back(fmt::format("sudden death at kt = {:.4g}; zero intervals:{}{}", f.death_times.front(),
                                        intervals, f.has_revival ? "; revival" : ""));
    if (f.permanent_death) curve.summary.push_back(fmt::format("stays separable from kt = {:.4g}", *f.permanent_death));
  } else {
    curve.summary.push_back("no sudden death");
  }
  return curve;
}

// ---- sweeps --------------------------------------------------------------

struct SweepCurveSpec {
  std::string label;
  double ratio = 0.0;  // fixed detuning for intensity sweeps
  std::optional<Variant> variant;
  double n_m = 0.0;
};

std::vector<SweepCurveSpec> sweep_specs(const RunConfig& c) {
  std::vector<SweepCurveSpec> specs;
  const bool by_detuning = c.sweep == SweepKind::detuning;
  const std::vector<double> fixed = by_detuning ? std::vector<double>{0.0} : c.detunings;
  for (double r : fixed) {
    const std::string prefix = by_detuning ? "" : fmt::format("delta0={:g}w ", r);
    if (c.mode == Mode::baseline) {
      specs.push_back({prefix + fmt::format("baseline n_m={:g}", c.n_m), r, std::nullopt, c.n_m});
      continue;
    }
    for (const auto& v : c.resolved_variants()) {
      const std::string tag = c.mode == Mode::compare ? variant_tag(v) + " vs baseline" : variant_tag(v);
      specs.push_back({prefix + tag, r, v, v.n_m});
    }
  }
  return specs;
}

void summarize_sweep(const RunConfig& c, Curve& curve, const std::string& axis) {
  const auto x = curve.column(axis);
  if (curve.variant) {
    const auto en = curve.column("E_N");
    const auto top = static_cast<std::size_t>(std::max_element(en.begin(), en.end()) - en.begin());
    const auto interior = interior_maximum(en);
    curve.summary.push_back(fmt::format("max E_N = {:.6g} at {} = {:.6g} ({})", en[top], axis, x[top],
                                        interior ? "interior maximum" : "maximum at range edge"));
    const auto zeros = std::count_if(en.begin(), en.end(), [&](double v) { return v <= c.thresholds.zero; });
    curve.summary.push_back(fmt::format("{} of {} points separable", zeros, en.size()));
  }
  if (baseline_mode(c.mode)) {
    const auto stable = curve.column("stable");
    const auto enb = curve.column("E_N_baseline");
    const auto n_stable = std::count(stable.begin(), stable.end(), 1.0);
    curve.summary.push_back(fmt::format("{} of {} points Routh-Hurwitz stable", n_stable, stable.size()));
    if (c.mode == Mode::compare) {
      const auto en = curve.column("E_N");
      const auto nq = curve.column("cavity_fluctuation");
      const auto nb = curve.column("cavity_fluctuation_baseline");
      double max_diff = 0.0;
      std::vector<double> fluct_gap;
      for (std::size_t i = 0; i < en.size(); ++i) {
        if (stable[i] != 1.0) continue;
        max_diff = std::max(max_diff, std::abs(en[i] - enb[i]));
        fluct_gap.push_back(std::abs(nq[i] - nb[i]));
      }
      curve.summary.push_back(fmt::format("max |E_N - E_N_baseline| over stable points = {:.6g}", max_diff));
      if (fluct_gap.size() >= 2) {
        curve.summary.push_back(fmt::format("cavity fluctuation gap {:.6g} at first stable point, {:.6g} at last",
                                            fluct_gap.front(), fluct_gap.back()));
      }
    }
  }
}

std::vector<Curve> sweep_curves(const RunConfig& c) {
  const bool by_detuning = c.sweep == SweepKind::detuning;
  const auto axis = by_detuning ? c.detuning_axis.values() : c.intensity_axis.values();
  const auto specs = sweep_specs(c);
  const std::string axis_name = by_detuning ? "delta0_over_omega_m" : "E_over_kappa";

  struct Slot {
    QuantumPoint q;
    BaselinePoint b;
  };
  std::vector<Slot> slots(specs.size() * axis.size());
  parallel_for(slots.size(), c.threads, [&](std::size_t k) {
    const auto& spec = specs[k / axis.size()];
    const double a = axis[k % axis.size()];
    const double ratio = by_detuning ? a : spec.ratio;
    const double E = by_detuning ? c.E_over_kappa : a;
    if (spec.variant) slots[k].q = quantum_point(c, *spec.variant, ratio, E);
    if (baseline_mode(c.mode)) slots[k].b = baseline_point(c, ratio, spec.n_m, E);
  });

  std::vector<Curve> curves;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    Curve curve;
    curve.label = specs[s].label;
    curve.stem = sanitize(curve.label);
    curve.delta0_over_omega_m = specs[s].ratio;
    curve.variant = specs[s].variant;
    curve.columns = {"delta0_over_omega_m", "E_over_kappa", "t_kappa"};
    if (curve.variant) curve.columns.insert(curve.columns.end(), kQuantumColumns.begin(), kQuantumColumns.end());
    if (baseline_mode(c.mode)) curve.columns.insert(curve.columns.end(), kBaselineColumns.begin(), kBaselineColumns.end());
    for (std::size_t i = 0; i < axis.size(); ++i) {
      const Slot& slot = slots[s * axis.size() + i];
      std::vector<double> row = {by_detuning ? axis[i] : specs[s].ratio, by_detuning ? c.E_over_kappa : axis[i],
                                 c.t_end};
      if (curve.variant) {
        row.insert(row.end(), {slot.q.en, slot.q.exponent, slot.q.ncav});
        curve.max_convergence_delta = std::max(curve.max_convergence_delta, slot.q.delta);
      }
      if (baseline_mode(c.mode)) {
        const auto& b = slot.b;
        row.insert(row.end(), {b.s1, b.s2, b.stable ? 1.0 : 0.0, b.eigen_stable ? 1.0 : 0.0, b.bistable ? 1.0 : 0.0,
                               b.en, b.ncav});
      }
      curve.rows.push_back(std::move(row));
    }
    summarize_sweep(c, curve, axis_name);
    curves.push_back(std::move(curve));
  }
  return curves;
}

// ---- stability map -------------------------------------------------------

std::vector<Curve> stability_map(const RunConfig& c) {
  const auto dets = c.detuning_axis.values();
  const auto es = c.intensity_axis.values();
  struct Cell {
    StabilityReport rh;
    ClassicalSteadyState st;
  };
  std::vector<Cell> cells(dets.size() * es.size());
  parallel_for(cells.size(), c.threads, [&](std::size_t k) {
    const auto p = c.params(dets[k / es.size()], c.n_m);
    cells[k].st = classical_steady_state(p, es[k % es.size()]);
    cells[k].rh = routh_hurwitz(p, cells[k].st);
  });

  Curve map;
  map.label = "stability map";
  map.stem = "stability_map";
  map.columns = kMapColumns;
  std::size_t s2_negative = 0, stable = 0, checked = 0, agree = 0, bistable = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < es.size(); ++j) {
      const auto& cell = cells[i * es.size() + j];
      const auto& r = cell.rh;
      map.rows.push_back({dets[i], es[j], r.s1, r.s2, r.stable ? 1.0 : 0.0, r.eigen_stable ? 1.0 : 0.0,
                          r.agrees() ? 1.0 : 0.0, r.drift_eigen_max_real, cell.st.bistable ? 1.0 : 0.0,
                          cell.st.coupling_G, cell.st.effective_detuning});
      s2_negative += r.s2 <= 0.0;
      stable += r.stable;
      bistable += cell.st.bistable;
      if (std::abs(r.s1) > 1e-9 * r.s1_scale) {
        ++checked;
        agree += r.agrees();
      }
    }
  }

  // Sign changes of s1 between grid neighbours, located by linear interpolation.
  Curve boundary;
  boundary.label = "s1 boundary";
  boundary.stem = "s1_boundary";
  boundary.columns = {"delta0_over_omega_m", "E_over_kappa"};
  auto s1 = [&](std::size_t i, std::size_t j) { return cells[i * es.size() + j].rh.s1; };
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (i + 1 < dets.size() && (s1(i, j) > 0.0) != (s1(i + 1, j) > 0.0)) {
        const double f = s1(i, j) / (s1(i, j) - s1(i + 1, j));
        boundary.rows.push_back({dets[i] + f * (dets[i + 1] - dets[i]), es[j]});
      }
      if (j + 1 < es.size() && (s1(i, j) > 0.0) != (s1(i, j + 1) > 0.0)) {
        const double f = s1(i, j) / (s1(i, j) - s1(i, j + 1));
        boundary.rows.push_back({dets[i], es[j] + f * (es[j + 1] - es[j])});
      }
    }
  }
  map.summary.push_back(fmt::format("{} of {} grid points stable; s2 <= 0 at {} points", stable, cells.size(),
                                    s2_negative));
  map.summary.push_back(fmt::format("Routh-Hurwitz and drift eigenvalues agree at {} of {} non-boundary points",
                                    agree, checked));
  map.summary.push_back(fmt::format("{} s1 sign-boundary points; {} bistable points", boundary.rows.size(), bistable));
  return {std::move(map), std::move(boundary)};
}

void cross_trace_summary(const std::vector<Curve>& curves, std::vector<std::string>& summary) {
  const Curve* best = nullptr;
  const Curve* earliest = nullptr;
  const Curve* earliest_final = nullptr;
  for (const auto& c : curves) {
    if (!c.trace_features) continue;
    if (!best || c.trace_features->final_value > best->trace_features->final_value) best = &c;
    const auto d = c.trace_features->first_death();
    if (d && (!earliest || *d < *earliest->trace_features->first_death())) earliest = &c;
    const auto p = c.trace_features->permanent_death;
    if (p && (!earliest_final || *p < *earliest_final->trace_features->permanent_death)) earliest_final = &c;
  }
  if (best) {
    summary.push_back(fmt::format("largest final E_N: {} ({:.6g})", best->label, best->trace_features->final_value));
  }
  if (earliest) {
    summary.push_back(
        fmt::format("earliest sudden death: {} at kt = {:.4g}", earliest->label, *earliest->trace_features->first_death()));
  } else if (best) {
    summary.push_back("no curve shows sudden death");
  }
  if (earliest_final) {
    summary.push_back(fmt::format("earliest permanent death: {} at kt = {:.4g}", earliest_final->label,
                                  *earliest_final->trace_features->permanent_death));
  }
}

Curve baseline_table(const RunConfig& c) {
  Curve curve;
  curve.label = fmt::format("baseline n_m={:g}", c.n_m);
  curve.stem = sanitize(curve.label);
  curve.columns = {"delta0_over_omega_m", "E_over_kappa"};
  curve.columns.insert(curve.columns.end(), kBaselineColumns.begin(), kBaselineColumns.end());
  for (double r : c.detunings) {
    const auto b = baseline_point(c, r, c.n_m, c.E_over_kappa);
    curve.rows.push_back({r, c.E_over_kappa, b.s1, b.s2, b.stable ? 1.0 : 0.0, b.eigen_stable ? 1.0 : 0.0,
                          b.bistable ? 1.0 : 0.0, b.en, b.ncav});
    curve.summary.push_back(b.stable ? fmt::format("delta0={:g}w: steady E_N = {:.6g}, cavity fluctuation = {:.6g}",
                                                   r, b.en, b.ncav)
                                     : fmt::format("delta0={:g}w: unstable (s1 = {:.4g}, s2 = {:.4g})", r, b.s1, b.s2));
  }
  return curve;
}

json features_json(const Curve& c) {
  json j;
  j["summary"] = c.summary;
  if (c.trace_features) {
    const auto& f = *c.trace_features;
    j["final_E_N"] = f.final_value;
    j["max_E_N"] = f.max_value;
    j["argmax_t_kappa"] = f.argmax_time;
    j["plateau_drift"] = f.plateau_drift;
    j["plateau"] = f.plateau;
    j["death_times"] = f.death_times;
    j["permanent_death"] = f.permanent_death ? json(*f.permanent_death) : json(nullptr);
    json zi = json::array();
    for (const auto& [a, b] : f.zero_intervals) zi.push_back({a, b});
    j["zero_intervals"] = zi;
    j["revival"] = f.has_revival;
  }
  return j;
}

json params_json(const SystemParams& p) {
  return {{"g", p.g},         {"kappa", p.kappa}, {"gamma_m", p.gamma_m}, {"omega_m", p.omega_m},
          {"delta0", p.delta0}, {"n_m", p.n_m},   {"n_th", p.reservoir_occupation()}, {"n_c", p.n_c}};
}

}  // namespace

std::vector<double> Curve::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column " + name);
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

RunResult execute(const RunConfig& config) {
  config.validate();
  RunResult result;
  result.config = config;
  for (const auto& w : config.params(config.detunings.front(), config.n_m).warnings()) result.warnings.push_back(w);

  switch (config.sweep) {
    case SweepKind::none:
      if (quantum_mode(config.mode)) {
        for (double r : config.detunings) {
          for (const auto& v : config.resolved_variants()) result.curves.push_back(trace_curve(config, r, v));
        }
        cross_trace_summary(result.curves, result.summary);
      }
      if (baseline_mode(config.mode)) {
        result.curves.push_back(baseline_table(config));
        const auto& s = result.curves.back().summary;
        result.summary.insert(result.summary.end(), s.begin(), s.end());
      }
      break;
    case SweepKind::detuning:
    case SweepKind::intensity:
      result.curves = sweep_curves(config);
      break;
    case SweepKind::stability_map:
      result.curves = stability_map(config);
      break;
  }
  return result;
}

std::string format_csv(const Curve& curve) {
  std::string out;
  for (std::size_t i = 0; i < curve.columns.size(); ++i) out += (i ? "," : "") + curve.columns[i];
  out += '\n';
  for (const auto& row : curve.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + g17(row[i]);
    out += '\n';
  }
  return out;
}

std::string format_combined_csv(const RunResult& result) {
  std::vector<std::string> columns;
  for (const auto& c : result.curves) {
    for (const auto& name : c.columns) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  std::string out = "curve";
  for (const auto& name : columns) out += "," + name;
  out += '\n';
  for (const auto& c : result.curves) {
    std::vector<int> where;
    for (const auto& name : columns) {
      const auto it = std::find(c.columns.begin(), c.columns.end(), name);
      where.push_back(it == c.columns.end() ? -1 : static_cast<int>(it - c.columns.begin()));
    }
    for (const auto& row : c.rows) {
      out += '"' + c.label + '"';
      for (int idx : where) out += "," + (idx < 0 ? std::string() : g17(row[static_cast<std::size_t>(idx)]));
      out += '\n';
    }
  }
  return out;
}

std::string format_manifest(const RunResult& result, const std::vector<std::string>& files) {
  const RunConfig& c = result.config;
  json m;
  m["tool"] = "optoent";
  m["version"] = kToolVersion;
  json cfg;
  for (const auto& [k, v] : describe(c)) cfg[k] = v;
  m["config"] = cfg;
  m["units"] = "kappa = 1; times in 1/kappa; quadrature vacuum variance 1/2";
  m["drive"] = {{"kind", std::string(to_string(c.drive))},
                {"E_over_kappa", c.E_over_kappa},
                {"pulse_width", c.drive == DriveKind::pulse ? c.pulse_width_over_omega_m * c.omega_m_over_kappa : 0.0}};
  const auto intervals = c.t_end > 0.0 ? std::max(static_cast<std::size_t>(std::ceil(c.t_end / c.grid_dt - 1e-9)),
                                                   c.grid().min_intervals)
                                        : std::size_t{0};
  m["grid"] = {{"k_step", c.grid_k_step},
               {"noise_step", c.grid_dt},
               {"noise_intervals_at_t_end", intervals},
               {"propagator", "closed_form"},
               {"accumulation", "running_sum"},
               {"convergence_check", "half resolution"},
               {"convergence_tol", c.convergence_tol}};
  m["thresholds"] = {{"esd_zero", c.thresholds.zero},
                     {"revival", c.thresholds.revival},
                     {"plateau_fraction", c.thresholds.plateau_fraction},
                     {"plateau_tol", c.thresholds.plateau_tol}};
  m["seed"] = c.seed;
  m["threads"] = c.threads;
  json curves = json::array();
  double worst = 0.0;
  for (const auto& curve : result.curves) {
    json j;
    j["label"] = curve.label;
    j["file"] = curve.stem + ".csv";
    j["rows"] = curve.rows.size();
    if (curve.variant) {
      j["mode"] = std::string(to_string(curve.variant->mode));
      j["params"] = params_json(c.params(curve.delta0_over_omega_m, curve.variant->n_m));
    }
    j["max_convergence_delta"] = curve.max_convergence_delta;
    j["features"] = features_json(curve);
    worst = std::max(worst, curve.max_convergence_delta);
    curves.push_back(j);
  }
  m["curves"] = curves;
  m["max_convergence_delta"] = worst;
  m["summary"] = result.summary;
  m["warnings"] = result.warnings;
  m["files"] = files;
  return m.dump(2) + "\n";
}

std::string format_summary(const RunResult& result) {
  std::string out = fmt::format("{} ({} curves)\n", result.config.name, result.curves.size());
  for (const auto& w : result.warnings) out += "warning: " + w + "\n";
  for (const auto& c : result.curves) {
    if (c.summary.empty()) continue;
    out += "  " + c.label + "\n";
    for (const auto& line : c.summary) out += "    " + line + "\n";
  }
  for (const auto& line : result.summary) out += "  " + line + "\n";
  return out;
}

std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  auto write = [&](const std::string& name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    paths.push_back(path);
  };
  for (const auto& c : result.curves) write(c.stem + ".csv", format_csv(c));
  write("combined.csv", format_combined_csv(result));
  write("summary.txt", format_summary(result));
  std::vector<std::string> names;
  for (const auto& p : paths) names.push_back(p.filename().string());
  names.push_back("manifest.json");
  write("manifest.json", format_manifest(result, names));
  return paths;
}

}  // namespace optoent
