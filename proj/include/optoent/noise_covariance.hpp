#pragma once

// Colored reservoir noise and the mean drive term.
//
// The decayed-plus-noise modes carry the noise operators
//   n_l(t, tau) = sqrt(r_l) \int_tau^t dtau' e^{-r_l (tau' - tau)/2} xi_l(tau'),
// with white xi_l of occupation n_l. Their two-time kernel is
//   k_l(tau1, tau2) = e^{-r_l |tau1 - tau2|/2} (1 - e^{-r_l (t - max(tau1, tau2))}),
// which is the commutator [n_l(t, tau1), n_l^dag(t, tau2)]; each noise
// quadrature has symmetrised correlator (n_l + 1/2) k_l.

#include "optoent/core_model.hpp"
#include "optoent/propagator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace optoent {

using Feed = Eigen::Matrix<double, 4, 2>;

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double colored_kernel(double rate, double t, double tau1, double tau2);

struct NoiseKernelSet {
  double t = 0.0;
  double kappa = 1.0;
  double gamma_m = 0.0;
  double n_c = 0.0;
  double n_th = 0.0;

  double mech_commutator(double tau1, double tau2) const { return colored_kernel(gamma_m, t, tau1, tau2); }
  double cav_commutator(double tau1, double tau2) const { return colored_kernel(kappa, t, tau1, tau2); }
  double mech_sym(double tau1, double tau2) const { return (n_th + 0.5) * mech_commutator(tau1, tau2); }
  double cav_sym(double tau1, double tau2) const { return (n_c + 0.5) * cav_commutator(tau1, tau2); }
};

NoiseKernelSet base_kernels(const SystemParams& params, double t);

struct KernelCheckOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t grid_points = 5;   // coarse tau grid per axis
  std::size_t fine_steps = 2000; // white-noise cells on [0, t]
};

struct KernelCheckReport {
  double rate = 0.0;
  double occupation = 0.0;
  std::size_t samples = 0;
  double max_z = 0.0;              // max |estimate - analytic| / standard error
  double max_abs_deviation = 0.0;
  double mean_standard_error = 0.0;

  bool consistent(double z_limit = 5.0) const { return max_z <= z_limit; }
};

/// Samples discretised complex white noise of variance (occupation + 1/2)/dtau,
/// builds n(t, tau) by its defining integral and compares the estimated
/// Re <n(tau1) n*(tau2)> with the analytic symmetrised kernel on a coarse grid.
/// Deterministic for a given seed.
KernelCheckReport monte_carlo_kernel_check(double rate, double occupation, double t,
                                           const KernelCheckOptions& options = {});

struct MonteCarloKernelReport {
  KernelCheckReport mechanical;
  KernelCheckReport cavity;
};

MonteCarloKernelReport monte_carlo_kernel_check(const SystemParams& params, double t,
                                                const KernelCheckOptions& options = {});

// Coefficients coupling the mechanical noise quadratures (X_nm, P_nm) into the
// cavity rows; the generator pattern with envelope e^{-kappa (t - tau)/2}.
Feed mechanical_feed(const SystemParams& params, Complex displacement, double t, double tau);

// Coefficients coupling the cavity noise quadratures (X_nc, P_nc) into the
// mechanical rows; the generator pattern with envelope e^{-gamma_m (t - tau)/2}.
Feed cavity_feed(const SystemParams& params, Complex displacement, double t, double tau);

// Deterministic |D|^2 drive of the mechanical rows.
Vec4 drive_feed(const SystemParams& params, Complex displacement, double t, double tau);

enum class Accumulation { running_sum, direct };

// V2 from a precomputed propagator family. running_sum splits the exponential
// kernel into two triangular recursions and is O(n); direct is the O(n^2)
// double sum. Both use the composite trapezoid on the family grid.
Mat4 noise_covariance_from_family(const SystemParams& params, const PropagatorFamily& family,
                                  Accumulation accumulation = Accumulation::running_sum);

Vec4 mean_from_family(const SystemParams& params, const PropagatorFamily& family);

struct NoiseCovarianceOptions {
  QuadratureGrid grid;
  PropagatorKind propagator = PropagatorKind::closed_form;
  Accumulation accumulation = Accumulation::running_sum;
  bool check_convergence = true;
  double convergence_tol = 1e-3;
};

struct NoiseCovarianceResult {
  Mat4 v2 = Mat4::Zero();
  // max_ij |V2(h) - V2(2h)| / max_ij |V2(h)|, zero when not checked.
  double convergence_delta = 0.0;
};

// max_ij |a - b| / max_ij |a|; zero when a vanishes identically.
double relative_entry_change(const Mat4& a, const Mat4& b);

/// V2(t) = \int\int dtau1 dtau2 Phi(t, tau1) S(tau1, tau2) Phi(t, tau2)^T.
/// Throws ConvergenceError when the half-resolution grid changes any entry by
/// more than convergence_tol relative to the largest entry.
NoiseCovarianceResult covariance_noise(const SystemParams& params, const DriveProfile& drive, double t,
                                       const NoiseCovarianceOptions& options = {});

/// <v(t)> = \int_0^t Phi(t, tau) f_det(t, tau) dtau for each requested time,
/// starting from zero means.
std::vector<Vec4> mean_trajectory(const SystemParams& params, const DriveProfile& drive,
                                  std::span<const double> times, const QuadratureGrid& grid = {},
                                  PropagatorKind kind = PropagatorKind::closed_form);

}  // namespace optoent
