#pragma once

// Standard fluctuation expansion around the classical steady state, used as
// the comparison baseline.
//
// The classical amplitude solves alpha_s = E/(kappa + i Delta) with
// Delta = delta0 - g^2 |alpha_s|^2 / omega_m. Fluctuations obey the linear
// drift A and diffusion D below (kappa as amplitude decay, as in alpha_s):
//
//       x_c    p_c    x_m    p_m
//   [ -kappa  Delta   0      0     ]
//   [ -Delta -kappa   G      0     ]
//   [   0      0      0    omega_m ]
//   [   G      0   -omega_m -gamma_m ]
//
//   D = diag(kappa (2 n_c + 1), kappa (2 n_c + 1), 0, gamma_m (2 n_th + 1)),
// normalised so that G = 0 gives back the uncoupled thermal state.

#include "optoent/core_model.hpp"
#include "optoent/entanglement.hpp"
#include "optoent/propagator.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace optoent {

struct ClassicalSteadyState {
  Complex alpha_s{0.0, 0.0};
  double coupling_G = 0.0;          // sqrt(2) g |alpha_s|
  double effective_detuning = 0.0;  // Delta
  double shift = 0.0;               // g^2 |alpha_s|^2 / omega_m
  bool converged = true;
  bool bistable = false;
  std::vector<double> intensity_roots;  // every positive root for |alpha_s|^2
  std::size_t iterations = 0;
};

// Positive real roots |alpha_s|^2 of the steady-state cubic, ascending.
std::vector<double> steady_intensity_roots(const SystemParams& params, double E);

/// Damped fixed-point iteration on the shift s = g^2 |alpha_s|^2 / omega_m,
/// starting from s = 0 so the branch connected to g -> 0 is followed.
/// When it fails within 1e4 iterations the state is flagged bistable and the
/// smallest root is used.
ClassicalSteadyState classical_steady_state(const SystemParams& params, double E);

struct StabilityReport {
  double s1 = 0.0;
  double s2 = 0.0;
  double s1_scale = 0.0;  // sum of the magnitudes of the two terms of s1
  bool stable = false;  // s1 > 0 and s2 > 0
  double drift_eigen_max_real = 0.0;
  bool eigen_stable = false;

  bool agrees() const { return stable == eigen_stable; }
};

Mat4 drift_matrix(const SystemParams& params, const ClassicalSteadyState& state);
Mat4 diffusion_matrix(const SystemParams& params);

StabilityReport routh_hurwitz(const SystemParams& params, const ClassicalSteadyState& state);
StabilityReport routh_hurwitz(const SystemParams& params, double E);

/// Solves A V + V A^T = -D through the vectorised 16x16 system, with one
/// step of iterative refinement.
Mat4 solve_lyapunov(const Mat4& a, const Mat4& d);

// Throws std::domain_error when the steady state is Routh-Hurwitz unstable.
CovMatrix4 baseline_steady_covariance(const SystemParams& params, double E);

double baseline_log_negativity(const SystemParams& params, double E);

double baseline_cavity_fluctuation(const SystemParams& params, double E);

}  // namespace optoent
