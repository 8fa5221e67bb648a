#include "optoent/baseline.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace optoent {

namespace {

constexpr std::size_t kMaxIterations = 10000;
constexpr double kRelTol = 1e-12;

// s^3 - 2 delta0 s^2 + (kappa^2 + delta0^2) s - g^2 E^2 / omega_m, with
// s = g^2 |alpha|^2 / omega_m.
struct ShiftCubic {
  double d0, k2, c;
  double value(double s) const { return ((s - 2.0 * d0) * s + k2 + d0 * d0) * s - c; }
  double slope(double s) const { return (3.0 * s - 4.0 * d0) * s + k2 + d0 * d0; }
};

ShiftCubic shift_cubic(const SystemParams& p, double E) {
  return {p.delta0, p.kappa * p.kappa, p.g * p.g * E * E / p.omega_m};
}

double polish(const ShiftCubic& cubic, double s) {
  for (int i = 0; i < 8; ++i) {
    const double d = cubic.slope(s);
    if (d == 0.0) break;
    const double step = cubic.value(s) / d;
    s -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(s))) break;
  }
  return s;
}

std::vector<double> positive_shift_roots(const SystemParams& p, double E) {
  const ShiftCubic cubic = shift_cubic(p, E);
  if (cubic.c == 0.0) return {};
  Eigen::Vector4d coeffs(-cubic.c, cubic.k2 + cubic.d0 * cubic.d0, -2.0 * cubic.d0, 1.0);
  Eigen::PolynomialSolver<double, 3> solver(coeffs);
  std::vector<double> real;
  solver.realRoots(real, 1e-6 * std::max(1.0, cubic.k2 + cubic.d0 * cubic.d0));
  std::vector<double> out;
  for (double r : real) {
    const double s = polish(cubic, r);
    if (s <= 0.0) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](double o) {
      return std::abs(o - s) <= 1e-9 * std::max(o, s);
    });
    if (!duplicate) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClassicalSteadyState state_from_shift(const SystemParams& p, double E, double s) {
  ClassicalSteadyState st;
  st.shift = s;
  st.effective_detuning = p.delta0 - s;
  st.alpha_s = E / Complex(p.kappa, st.effective_detuning);
  st.coupling_G = std::numbers::sqrt2 * p.g * std::abs(st.alpha_s);
  return st;
}

}  // namespace

std::vector<double> steady_intensity_roots(const SystemParams& params, double E) {
  auto roots = positive_shift_roots(params, E);
  for (double& s : roots) s *= params.omega_m / (params.g * params.g);
  return roots;
}

ClassicalSteadyState classical_steady_state(const SystemParams& params, double E) {
  params.validate();
  if (E < 0.0) throw std::invalid_argument("classical_steady_state: E must be non-negative");
  if (params.g == 0.0 || E == 0.0) return state_from_shift(params, E, 0.0);

  const ShiftCubic cubic = shift_cubic(params, E);
  const double k2 = cubic.k2;
  auto map = [&](double s) {
    const double d = params.delta0 - s;
    return cubic.c / (k2 + d * d);
  };
  double s = 0.0;
  bool converged = false;
  std::size_t it = 0;
  for (; it < kMaxIterations; ++it) {
    const double f = map(s);
    const double d = params.delta0 - s;
    // d map / ds; damping 1/(1 + |slope|) keeps the step contractive when the
    // slope is negative.
    const double slope = f * 2.0 * d / (k2 + d * d);
    const double lambda = 1.0 / (1.0 + std::abs(slope));
    const double next = s + lambda * (f - s);
    if (std::abs(next - s) <= kRelTol * std::max(std::abs(next), 1e-300)) {
      s = next;
      converged = true;
      break;
    }
    s = next;
  }

  const auto roots = positive_shift_roots(params, E);
  ClassicalSteadyState st;
  if (converged) {
    st = state_from_shift(params, E, polish(cubic, s));
  } else {
    st = state_from_shift(params, E, roots.empty() ? s : roots.front());
  }
  st.converged = converged;
  st.iterations = it;
  st.bistable = !converged || roots.size() > 1;
  for (double r : roots) st.intensity_roots.push_back(r * params.omega_m / (params.g * params.g));
  return st;
}

Mat4 drift_matrix(const SystemParams& params, const ClassicalSteadyState& state) {
  const double k = params.kappa;
  const double d = state.effective_detuning;
  const double G = state.coupling_G;
  const double w = params.omega_m;
  Mat4 a;
  a << -k, d, 0, 0,
       -d, -k, G, 0,
       0, 0, 0, w,
       G, 0, -w, -params.gamma_m;
  return a;
}

Mat4 diffusion_matrix(const SystemParams& params) {
  Mat4 d = Mat4::Zero();
  const double cav = params.kappa * (2.0 * params.n_c + 1.0);
  d.diagonal() << cav, cav, 0.0, params.gamma_m * (2.0 * params.reservoir_occupation() + 1.0);
  return d;
}

StabilityReport routh_hurwitz(const SystemParams& params, const ClassicalSteadyState& state) {
  const double k = params.kappa;
  const double gm = params.gamma_m;
  const double w = params.omega_m;
  const double d = state.effective_detuning;
  const double G2 = state.coupling_G * state.coupling_G;
  StabilityReport r;
  const double damping = 2.0 * gm * k *
                         ((k * k + (w - d) * (w - d)) * (k * k + (w + d) * (w + d)) +
                          gm * ((gm + 2.0 * k) * (k * k + d * d) + 2.0 * k * w * w));
  const double pressure = d * w * G2 * (gm + 2.0 * k) * (gm + 2.0 * k);
  r.s1 = damping + pressure;
  r.s1_scale = std::abs(damping) + std::abs(pressure);
  r.s2 = w * (k * k + d * d) - G2 * d;
  r.stable = r.s1 > 0.0 && r.s2 > 0.0;
  const Eigen::Vector4cd ev = drift_matrix(params, state).eigenvalues();
  r.drift_eigen_max_real = ev.real().maxCoeff();
  r.eigen_stable = r.drift_eigen_max_real < 0.0;
  return r;
}

StabilityReport routh_hurwitz(const SystemParams& params, double E) {
  return routh_hurwitz(params, classical_steady_state(params, E));
}

Mat4 solve_lyapunov(const Mat4& a, const Mat4& d) {
  using Mat16 = Eigen::Matrix<double, 16, 16>;
  using Vec16 = Eigen::Matrix<double, 16, 1>;
  const Mat4 id = Mat4::Identity();
  const Mat16 op = Eigen::kroneckerProduct(id, a) + Eigen::kroneckerProduct(a, id);
  const Eigen::FullPivLU<Mat16> lu(op);
  const Vec16 rhs = -Eigen::Map<const Vec16>(d.data());
  Vec16 x = lu.solve(rhs);
  x += lu.solve(rhs - op * x);
  Mat4 v = Eigen::Map<const Mat4>(x.data());
  return 0.5 * (v + v.transpose());
}

CovMatrix4 baseline_steady_covariance(const SystemParams& params, double E) {
  const auto state = classical_steady_state(params, E);
  const auto report = routh_hurwitz(params, state);
  if (!report.stable) {
    std::ostringstream msg;
    msg << "baseline: classical steady state unstable (s1 = " << report.s1 << ", s2 = " << report.s2
        << ") at delta0 = " << params.delta0 << ", E = " << E;
    throw std::domain_error(msg.str());
  }
  return CovMatrix4(solve_lyapunov(drift_matrix(params, state), diffusion_matrix(params)));
}

double baseline_log_negativity(const SystemParams& params, double E) {
  return log_negativity(baseline_steady_covariance(params, E));
}

double baseline_cavity_fluctuation(const SystemParams& params, double E) {
  return cavity_fluctuation_number(baseline_steady_covariance(params, E));
}

}  // namespace optoent
