#include "optoent/noise_covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace optoent {

namespace {

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n + 1, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  if (n == 0) w[0] = 0.0;
  return w;
}

// \sum_ij w_i w_j k(tau_i, tau_j) Y_i Y_j^T with k the colored kernel of `rate`.
Mat4 accumulate_running(const std::vector<Feed, Eigen::aligned_allocator<Feed>>& y,
                        const std::vector<double>& w, const std::vector<double>& nodes, double rate,
                        double t, double h) {
  const double rho = std::exp(-0.5 * rate * h);
  Feed partial = Feed::Zero();
  Mat4 acc = Mat4::Zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    partial = rho * partial + w[i] * y[i];
    const double q = -std::expm1(-rate * (t - nodes[i]));
    if (q == 0.0) continue;
    const Mat4 outer = y[i] * partial.transpose();
    acc += w[i] * q * (outer + outer.transpose() - w[i] * y[i] * y[i].transpose());
  }
  return acc;
}

Mat4 accumulate_direct(const std::vector<Feed, Eigen::aligned_allocator<Feed>>& y,
                       const std::vector<double>& w, const std::vector<double>& nodes, double rate,
                       double t) {
  Mat4 acc = Mat4::Zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    Feed row = Feed::Zero();
    for (std::size_t j = 0; j < y.size(); ++j) {
      row += w[j] * colored_kernel(rate, t, nodes[i], nodes[j]) * y[j];
    }
    acc += w[i] * y[i] * row.transpose();
  }
  return 0.5 * (acc + acc.transpose());
}

}  // namespace

double colored_kernel(double rate, double t, double tau1, double tau2) {
  const double later = std::max(tau1, tau2);
  return std::exp(-0.5 * rate * std::abs(tau1 - tau2)) * -std::expm1(-rate * (t - later));
}

NoiseKernelSet base_kernels(const SystemParams& params, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("base_kernels: t must be positive");
  return {t, params.kappa, params.gamma_m, params.n_c, params.reservoir_occupation()};
}

KernelCheckReport monte_carlo_kernel_check(double rate, double occupation, double t,
                                           const KernelCheckOptions& options) {
  if (options.samples < 10000) {
    throw std::invalid_argument("monte_carlo_kernel_check: at least 1e4 samples required");
  }
  if (options.grid_points == 0 || options.fine_steps < options.grid_points) {
    throw std::invalid_argument("monte_carlo_kernel_check: grid_points must be in [1, fine_steps]");
  }
  const std::size_t cells = options.fine_steps;
  const std::size_t points = options.grid_points;
  const double h = t / static_cast<double>(cells);
  const double sigma = std::sqrt((occupation + 0.5) / h / 2.0);  // per real component
  const double decay = std::exp(-0.5 * rate * h);
  const double inject = std::sqrt(rate) * std::exp(-0.25 * rate * h) * h;

  std::vector<std::size_t> index(points);
  for (std::size_t a = 0; a < points; ++a) index[a] = a * cells / points;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<Complex> at(points);
  std::vector<double> mean(points * points, 0.0), m2(points * points, 0.0);

  for (std::size_t s = 0; s < options.samples; ++s) {
    // Backward recursion from tau = t, where n vanishes.
    Complex acc{0.0, 0.0};
    std::size_t next = points;
    for (std::size_t k = cells; k-- > 0;) {
      const Complex xi{normal(rng), normal(rng)};
      acc = decay * acc + inject * xi;
      while (next > 0 && index[next - 1] == k) at[--next] = acc;
    }
    const double count = static_cast<double>(s + 1);
    for (std::size_t a = 0; a < points; ++a) {
      for (std::size_t b = 0; b < points; ++b) {
        const double x = (at[a] * std::conj(at[b])).real();
        double& mu = mean[a * points + b];
        const double delta = x - mu;
        mu += delta / count;
        m2[a * points + b] += delta * (x - mu);
      }
    }
  }

  KernelCheckReport report;
  report.rate = rate;
  report.occupation = occupation;
  report.samples = options.samples;
  double se_sum = 0.0;
  for (std::size_t a = 0; a < points; ++a) {
    for (std::size_t b = 0; b < points; ++b) {
      const double tau_a = index[a] * h;
      const double tau_b = index[b] * h;
      const double analytic = (occupation + 0.5) * colored_kernel(rate, t, tau_a, tau_b);
      const double var = m2[a * points + b] / static_cast<double>(options.samples - 1);
      const double se = std::sqrt(var / static_cast<double>(options.samples));
      const double dev = std::abs(mean[a * points + b] - analytic);
      const double z = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY);
      report.max_z = std::max(report.max_z, z);
      report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
      se_sum += se;
    }
  }
  report.mean_standard_error = se_sum / static_cast<double>(points * points);
  return report;
}

MonteCarloKernelReport monte_carlo_kernel_check(const SystemParams& params, double t,
                                                const KernelCheckOptions& options) {
  KernelCheckOptions cavity = options;
  cavity.seed = options.seed ^ 0x9e3779b97f4a7c15ULL;
  return {monte_carlo_kernel_check(params.gamma_m, params.reservoir_occupation(), t, options),
          monte_carlo_kernel_check(params.kappa, params.n_c, t, cavity)};
}

Feed mechanical_feed(const SystemParams& params, Complex displacement, double t, double tau) {
  const auto c = coupling_coeffs(params, displacement, tau, std::exp(-0.5 * params.kappa * (t - tau)));
  Feed f = Feed::Zero();
  f(0, 0) = c.l3;
  f(0, 1) = c.l4;
  f(1, 0) = c.l1;
  f(1, 1) = c.l2;
  return f;
}

Feed cavity_feed(const SystemParams& params, Complex displacement, double t, double tau) {
  const auto c = coupling_coeffs(params, displacement, tau, std::exp(-0.5 * params.gamma_m * (t - tau)));
  Feed f = Feed::Zero();
  f(2, 0) = -c.l2;
  f(2, 1) = c.l4;
  f(3, 0) = c.l1;
  f(3, 1) = -c.l3;
  return f;
}

Vec4 drive_feed(const SystemParams& params, Complex displacement, double t, double tau) {
  const double amp = std::numbers::sqrt2 * params.g * std::exp(-0.5 * params.gamma_m * (t - tau)) *
                     std::norm(displacement);
  return {0.0, 0.0, -amp * std::sin(params.omega_m * tau), amp * std::cos(params.omega_m * tau)};
}

Mat4 noise_covariance_from_family(const SystemParams& params, const PropagatorFamily& family,
                                  Accumulation accumulation) {
  const std::size_t n = family.nodes.size() - 1;
  if (n == 0) return Mat4::Zero();
  const double t = family.t;
  const auto w = trapezoid_weights(n, family.step);

  std::vector<Feed, Eigen::aligned_allocator<Feed>> ym(n + 1), yc(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double tau = family.nodes[i];
    ym[i] = family.phi[i] * mechanical_feed(params, family.displacement[i], t, tau);
    yc[i] = family.phi[i] * cavity_feed(params, family.displacement[i], t, tau);
  }
  Mat4 mech, cav;
  if (accumulation == Accumulation::running_sum) {
    mech = accumulate_running(ym, w, family.nodes, params.gamma_m, t, family.step);
    cav = accumulate_running(yc, w, family.nodes, params.kappa, t, family.step);
  } else {
    mech = accumulate_direct(ym, w, family.nodes, params.gamma_m, t);
    cav = accumulate_direct(yc, w, family.nodes, params.kappa, t);
  }
  const Mat4 v2 = (params.reservoir_occupation() + 0.5) * mech + (params.n_c + 0.5) * cav;
  return 0.5 * (v2 + v2.transpose());
}

Vec4 mean_from_family(const SystemParams& params, const PropagatorFamily& family) {
  const std::size_t n = family.nodes.size() - 1;
  Vec4 mean = Vec4::Zero();
  if (n == 0) return mean;
  const auto w = trapezoid_weights(n, family.step);
  for (std::size_t i = 0; i <= n; ++i) {
    mean += w[i] * family.phi[i] * drive_feed(params, family.displacement[i], family.t, family.nodes[i]);
  }
  return mean;
}

double relative_entry_change(const Mat4& a, const Mat4& b) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return (b.cwiseAbs().maxCoeff() == 0.0) ? 0.0 : INFINITY;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

NoiseCovarianceResult covariance_noise(const SystemParams& params, const DriveProfile& drive, double t,
                                       const NoiseCovarianceOptions& options) {
  NoiseCovarianceResult out;
  const auto fam = propagator_family(params, drive, t, options.grid, options.propagator);
  out.v2 = noise_covariance_from_family(params, fam, options.accumulation);
  if (options.check_convergence && t > 0.0) {
    const auto coarse = propagator_family(params, drive, t, options.grid.coarsened(), options.propagator);
    const Mat4 v2c = noise_covariance_from_family(params, coarse, options.accumulation);
    out.convergence_delta = relative_entry_change(out.v2, v2c);
    if (out.convergence_delta > options.convergence_tol) {
      std::ostringstream msg;
      msg << "noise covariance not converged at t = " << t << ": half-resolution change "
          << out.convergence_delta << " exceeds tolerance " << options.convergence_tol
          << " (noise step " << options.grid.noise_step << "; try a smaller --grid-dt)";
      throw ConvergenceError(msg.str());
    }
  }
  return out;
}

std::vector<Vec4> mean_trajectory(const SystemParams& params, const DriveProfile& drive,
                                  std::span<const double> times, const QuadratureGrid& grid,
                                  PropagatorKind kind) {
  std::vector<Vec4> out;
  out.reserve(times.size());
  for (double t : times) {
    out.push_back(mean_from_family(params, propagator_family(params, drive, t, grid, kind)));
  }
  return out;
}

}  // namespace optoent
