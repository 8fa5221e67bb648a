#include "optoent/entanglement.hpp"

#include "optoent/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optoent {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDiscriminantFloor = -1e-12;
constexpr double kTransposedTol = 1e-6;

double discriminant_root(double sigma, double det, const char* what) {
  double disc = sigma * sigma - 4.0 * det;
  if (disc < 0.0) {
    if (disc < kDiscriminantFloor * std::max(1.0, sigma * sigma)) {
      std::ostringstream msg;
      msg << what << ": negative discriminant " << disc;
      throw PhysicalityError(msg.str());
    }
    disc = 0.0;
  }
  return std::sqrt(disc);
}

}  // namespace

CovMatrix4::CovMatrix4(const Mat4& m) : m_(m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw std::invalid_argument("CovMatrix4: matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

std::array<double, 2> CovMatrix4::symplectic_eigenvalues() const {
  // The singular values of V^{1/2} J V^{1/2} are (nu_+, nu_+, nu_-, nu_-). Unlike
  // the determinant formula this stays accurate when nu_- and nu_+ coincide,
  // which is the case for every pure state.
  const Eigen::SelfAdjointEigenSolver<Mat4> es(m_);
  if (es.eigenvalues().minCoeff() <= 0.0) return {0.0, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()))};
  const Mat4 root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::JacobiSVD<Mat4> svd(root * symplectic_form() * root);
  const auto& sv = svd.singularValues();
  return {0.5 * (sv(2) + sv(3)), 0.5 * (sv(0) + sv(1))};
}

CovMatrix4 initial_covariance(const SystemParams& params) {
  Mat4 v = Mat4::Zero();
  v.diagonal() << 0.5, 0.5, params.n_m + 0.5, params.n_m + 0.5;
  return CovMatrix4(v);
}

double smallest_transposed_eigenvalue(const CovMatrix4& v) {
  const double sigma = v.cavity().determinant() + v.mechanics().determinant() - 2.0 * v.cross().determinant();
  const double det = v.matrix().determinant();
  const double root = discriminant_root(sigma, det, "log_negativity");
  const double hi = 0.5 * (sigma + root);
  if (sigma < 0.0 || hi <= 0.0) return std::sqrt(std::max(0.0, 0.5 * (sigma - root)));
  return std::sqrt(std::max(0.0, det) / hi);
}

double negativity_exponent(const CovMatrix4& v) { return -std::log(2.0 * smallest_transposed_eigenvalue(v)); }

double log_negativity(const CovMatrix4& v) {
  const double eta = smallest_transposed_eigenvalue(v);
  if (eta < 0.5 - kTransposedTol && !v.is_physical()) {
    std::ostringstream msg;
    msg << "log_negativity: unphysical correlation matrix (nu_- = " << v.symplectic_eigenvalues()[0] << ")";
    throw PhysicalityError(msg.str());
  }
  return std::max(0.0, -std::log(2.0 * eta));
}

double cavity_fluctuation_number(const CovMatrix4& v) { return 0.5 * (v(0, 0) + v(1, 1) - 1.0); }

EvolvedState evolve_state(const SystemParams& params, const DriveProfile& drive, double t,
                          const EvolveOptions& options) {
  if (t < 0.0) throw std::invalid_argument("evolve_state: t must be non-negative");
  const auto family = propagator_family(params, drive, t, options.grid, options.propagator);
  const Mat4& phi = family.phi.front();
  Mat4 v = phi * initial_covariance(params).matrix() * phi.transpose();

  EvolvedState out;
  if (options.include_noise) {
    const Mat4 v2 = noise_covariance_from_family(params, family);
    if (options.check_convergence && t > 0.0) {
      const auto coarse = propagator_family(params, drive, t, options.grid.coarsened(), options.propagator);
      out.convergence_delta = relative_entry_change(v2, noise_covariance_from_family(params, coarse));
      if (out.convergence_delta > options.convergence_tol) {
        std::ostringstream msg;
        msg << "noise covariance not converged at t = " << t << ": half-resolution change "
            << out.convergence_delta << " exceeds tolerance " << options.convergence_tol << " (noise step "
            << options.grid.noise_step << "; try a smaller --grid-dt)";
        throw ConvergenceError(msg.str());
      }
    }
    v += v2;
  }
  out.covariance = CovMatrix4(0.5 * (v + v.transpose()));
  out.mean = mean_from_family(params, family);
  if (!out.covariance.is_physical()) {
    std::ostringstream msg;
    msg << "evolved correlation matrix violates the uncertainty relation at t = " << t
        << " (nu_- = " << out.covariance.symplectic_eigenvalues()[0] << ")";
    throw PhysicalityError(msg.str());
  }
  return out;
}

CovMatrix4 evolve_covariance(const SystemParams& params, const DriveProfile& drive, double t,
                             const EvolveOptions& options) {
  return evolve_state(params, drive, t, options).covariance;
}

std::vector<double> uniform_times(double t_end, std::size_t samples) {
  if (samples == 0) return {};
  if (samples == 1) return {t_end};
  std::vector<double> out(samples);
  for (std::size_t i = 0; i < samples; ++i) out[i] = t_end * static_cast<double>(i) / (samples - 1);
  return out;
}

EntanglementTrace compute_trace(const SystemParams& params, const DriveProfile& drive,
                                std::span<const double> times, const EvolveOptions& options,
                                unsigned threads) {
  const std::size_t n = times.size();
  EntanglementTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.log_negativity.resize(n);
  trace.exponent.resize(n);
  trace.cavity_fluctuation.resize(n);
  trace.means.resize(n);
  std::vector<double> deltas(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const EvolvedState s = evolve_state(params, drive, times[i], options);
    trace.exponent[i] = negativity_exponent(s.covariance);
    trace.log_negativity[i] = log_negativity(s.covariance);
    trace.cavity_fluctuation[i] = cavity_fluctuation_number(s.covariance);
    trace.means[i] = s.mean;
    deltas[i] = s.convergence_delta;
  });
  for (double d : deltas) trace.max_convergence_delta = std::max(trace.max_convergence_delta, d);
  return trace;
}

}  // namespace optoent
