#include "optoent/thermal_oracle.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace optoent {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

struct BirthDeath {
  double down;  // gamma (n_th + 1)
  double up;    // gamma n_th

  void operator()(const State& p, State& dp, double) const {
    const std::size_t last = p.size() - 1;
    for (std::size_t n = 0; n <= last; ++n) {
      const double k = static_cast<double>(n);
      double rate = 0.0;
      if (n < last) rate += down * (k + 1.0) * p[n + 1] - up * (k + 1.0) * p[n];
      if (n > 0) rate += up * k * p[n - 1] - down * k * p[n];
      dp[n] = rate;
    }
  }
};

double mean_occupation(const State& p) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += static_cast<double>(n) * p[n];
  return s;
}

double geometric_spread(const State& p) {
  const double floor = 1e-6 * *std::max_element(p.begin(), p.end());
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = 0; n + 1 < p.size(); ++n) {
    if (p[n] <= floor || p[n + 1] <= floor) break;
    const double r = p[n + 1] / p[n];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!(hi >= lo)) return 0.0;
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

}  // namespace

std::vector<double> thermal_populations(double n, std::size_t n_max) {
  if (n < 0.0) throw std::invalid_argument("thermal_populations: occupation must be non-negative");
  std::vector<double> p(n_max + 1, 0.0);
  const double q = n / (n + 1.0);
  double term = 1.0;
  for (auto& x : p) {
    x = term;
    term *= q;
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= total;
  return p;
}

std::size_t default_fock_cutoff(double n_m, double n_th) {
  return static_cast<std::size_t>(std::ceil(10.0 * std::max(n_m, n_th))) + 20;
}

FockThermalState relax_occupation(double n_m, double n_th, double gamma_m, double t,
                                  const RelaxOptions& options) {
  if (n_m < 0.0 || n_th < 0.0) throw std::invalid_argument("relax_occupation: occupations must be non-negative");
  if (gamma_m < 0.0) throw std::invalid_argument("relax_occupation: gamma_m must be non-negative");
  if (t < 0.0) throw std::invalid_argument("relax_occupation: t must be non-negative");

  std::size_t n_max = default_fock_cutoff(n_m, n_th);
  const BirthDeath rhs{gamma_m * (n_th + 1.0), gamma_m * n_th};
  FockThermalState out;
  for (int attempt = 0;; ++attempt) {
    State p = thermal_populations(n_m, n_max);
    // The tail also biases the mean by about n_max p_{n_max}, so that product
    // is held to the same tolerance.
    const double weight = static_cast<double>(n_max + 1);
    const bool initial_cut = p.back() * weight > options.truncation_tol;
    if (t > 0.0 && gamma_m > 0.0) {
      auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
      const double dt0 = 0.01 / (gamma_m * (1.0 + 2.0 * n_th) * static_cast<double>(n_max + 1));
      odeint::integrate_adaptive(stepper, rhs, p, 0.0, t, dt0);
    }
    out.truncation_flag = p.back() > options.truncation_tol;
    if ((initial_cut || p.back() * weight > options.truncation_tol) && attempt < options.max_doublings) {
      n_max *= 2;
      continue;
    }
    out.populations = std::move(p);
    break;
  }
  out.n_max = n_max;
  out.time = t;
  out.occupation = mean_occupation(out.populations);
  out.trace_error = std::abs(std::accumulate(out.populations.begin(), out.populations.end(), 0.0) - 1.0);
  out.ratio_spread = geometric_spread(out.populations);
  return out;
}

double closed_form_occupation(double n_m, double n_th, double rate, double t) {
  return n_th + (n_m - n_th) * std::exp(-rate * t);
}

RelaxationProbe relaxation_exponent(double n_m, double n_th, double gamma_m, double t_end, std::size_t samples,
                                    const RelaxOptions& options) {
  if (n_m == n_th) throw std::invalid_argument("relaxation_exponent: n_m and n_th must differ");
  if (!(gamma_m > 0.0) || !(t_end > 0.0) || samples < 2) {
    throw std::invalid_argument("relaxation_exponent: need gamma_m > 0, t_end > 0 and two samples");
  }
  RelaxationProbe probe;
  probe.gamma_m = gamma_m;
  std::vector<double> y;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = t_end * static_cast<double>(i) / static_cast<double>(samples);
    const double n = relax_occupation(n_m, n_th, gamma_m, t, options).occupation;
    probe.times.push_back(t);
    probe.occupations.push_back(n);
    y.push_back(std::log(std::abs((n - n_th) / (n_m - n_th))));
  }
  // Line through the origin: ln ratio = -rate t.
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    sty += probe.times[i] * y[i];
    stt += probe.times[i] * probe.times[i];
  }
  probe.measured_rate = -sty / stt;
  for (std::size_t i = 0; i < samples; ++i) {
    probe.fit_residual = std::max(probe.fit_residual, std::abs(y[i] + probe.measured_rate * probe.times[i]));
  }
  return probe;
}

}  // namespace optoent
