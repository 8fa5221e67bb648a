#pragma once

// Correlation matrices and logarithmic negativity.
//
// Convention: V_ij = <u_i u_j + u_j u_i>/2 - <u_i><u_j> with
// u = (x_c, p_c, x_m, p_m) and vacuum variance 1/2.

#include "optoent/core_model.hpp"
#include "optoent/noise_covariance.hpp"
#include "optoent/propagator.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace optoent {

class PhysicalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPhysicalityTol = 1e-9;

class CovMatrix4 {
 public:
  CovMatrix4() = default;
  // Throws std::invalid_argument when m is not symmetric to 1e-12 relative.
  explicit CovMatrix4(const Mat4& m);

  const Mat4& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Eigen::Matrix2d cavity() const { return m_.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d mechanics() const { return m_.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d cross() const { return m_.topRightCorner<2, 2>(); }

  // Symplectic eigenvalues (nu_-, nu_+) of the matrix itself; nu_- = 0 when V
  // is not positive definite.
  std::array<double, 2> symplectic_eigenvalues() const;

  bool is_physical(double tol = kPhysicalityTol) const { return symplectic_eigenvalues()[0] >= 0.5 - tol; }

 private:
  Mat4 m_ = 0.5 * Mat4::Identity();
};

// diag(1/2, 1/2, n_m + 1/2, n_m + 1/2): cavity vacuum times mechanical thermal state.
CovMatrix4 initial_covariance(const SystemParams& params);

// eta^- = sqrt(Sigma - sqrt(Sigma^2 - 4 det V)) / sqrt(2) with
// Sigma = det A + det B - 2 det C.
double smallest_transposed_eigenvalue(const CovMatrix4& v);

// -ln(2 eta^-), negative for separable states.
double negativity_exponent(const CovMatrix4& v);

/// E_N = max(0, -ln 2 eta^-). Throws PhysicalityError when eta^- < 1/2 - 1e-6
/// and V itself violates the uncertainty relation.
double log_negativity(const CovMatrix4& v);

// <da^dag da> = (V11 + V22 - 1)/2.
double cavity_fluctuation_number(const CovMatrix4& v);

struct EvolveOptions {
  QuadratureGrid grid;
  PropagatorKind propagator = PropagatorKind::closed_form;
  bool include_noise = true;
  bool check_convergence = true;
  double convergence_tol = 1e-3;
};

struct EvolvedState {
  CovMatrix4 covariance;
  Vec4 mean = Vec4::Zero();
  double convergence_delta = 0.0;
};

/// V(t) = Phi(t, 0) V(0) Phi(t, 0)^T + V2(t), plus the mean quadratures.
/// Throws PhysicalityError if the result violates the uncertainty relation
/// and ConvergenceError from the noise quadrature.
EvolvedState evolve_state(const SystemParams& params, const DriveProfile& drive, double t,
                          const EvolveOptions& options = {});

CovMatrix4 evolve_covariance(const SystemParams& params, const DriveProfile& drive, double t,
                             const EvolveOptions& options = {});

struct EntanglementTrace {
  std::vector<double> times;
  std::vector<double> log_negativity;
  std::vector<double> exponent;  // -ln 2 eta^- before clamping
  std::vector<double> cavity_fluctuation;
  std::vector<Vec4, Eigen::aligned_allocator<Vec4>> means;
  double max_convergence_delta = 0.0;
};

// `samples` points spanning [0, t_end] inclusive.
std::vector<double> uniform_times(double t_end, std::size_t samples);

/// Evaluates the state at each time. Work is split over `threads` workers
/// (0 = hardware concurrency); the output order and values do not depend on it.
EntanglementTrace compute_trace(const SystemParams& params, const DriveProfile& drive,
                                std::span<const double> times, const EvolveOptions& options = {},
                                unsigned threads = 0);

}  // namespace optoent
