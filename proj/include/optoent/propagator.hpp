#pragma once

// Generator of the linearised quadrature dynamics and its propagators.
//
// For a fixed final time t the quadrature vector v = (x_c, p_c, x_m, p_m)
// obeys dv/dtau = M(t, tau) v + f(t, tau). Two propagators are provided:
// the closed form exp(K(t, tau)) with K = \int_tau^t M, which assumes the
// generators at different tau commute, and a time-ordered product of
// short-step exponentials used as the reference.

#include "optoent/core_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace optoent {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

inline constexpr double kDefaultKStep = 1e-3;
inline constexpr double kDefaultNoiseStep = 5e-3;

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Real coupling coefficients l1..l4 of the generator. They share the pattern
//   l1 = 2 g env Re D cos(w tau),  l2 = 2 g env Re D sin(w tau),
//   l3 = -2 g env Im D cos(w tau), l4 = -2 g env Im D sin(w tau).
struct GeneratorCoeffs {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l4 = 0.0;
};

GeneratorCoeffs coupling_coeffs(const SystemParams& params, Complex displacement, double tau,
                                double envelope);

// Coefficients of M(t, tau): envelope exp(-(kappa + gamma_m)(t - tau)/2).
GeneratorCoeffs generator_coeffs(const SystemParams& params, Complex displacement, double t, double tau);

// Places l1..l4 into the cavity/mechanics cross pattern
//   [  0    0   l3  l4 ]
//   [  0    0   l1  l2 ]
//   [ -l2  l4   0   0  ]
//   [  l1 -l3   0   0  ]
Mat4 generator_matrix(const GeneratorCoeffs& c);

Mat4 generator(const SystemParams& params, const DriveProfile& drive, double t, double tau);

// Block-diagonal symplectic form J = diag([[0,1],[-1,0]], [[0,1],[-1,0]]).
const Mat4& symplectic_form();

// || Phi J Phi^T - J ||_F
double symplectic_defect(const Mat4& phi);

// Symmetric S with M = J S. Hamiltonian generators yield symmetric S exactly.
Mat4 hamiltonian_matrix(const Mat4& generator);

// Evaluates m = |(L1+L4) + i(L2-L3)|^2/4 - |(L1-L4) - i(L2+L3)|^2/4 from the
// entries of a matrix with the generator pattern, where Li = \int li.
double square_scalar(const Mat4& k);

struct KIntegral {
  Mat4 k;
  double m = 0.0;
  double structure_residual = 0.0;  // max |K^2 - m I| / max(|m|, |K|_max^2)
};

/// K(t, tau) = \int_tau^t M(t, tau') dtau' by the trapezoid rule on a uniform
/// grid no coarser than `step`. Throws StructureError when K^2 deviates from
/// m I by more than 1e-9 relative.
KIntegral k_integral(const SystemParams& params, const DriveProfile& drive, double t, double tau,
                     double step = kDefaultKStep);

/// cosh(sqrt m) I + sinh(sqrt m)/sqrt(m) K, continued to cos/sin for m < 0 and
/// replaced by its fourth-order series for |m| < 1e-12.
Mat4 commuting_exponential(const Mat4& k, double m);

struct Propagator4 {
  Mat4 matrix = Mat4::Identity();
  double t_from = 0.0;
  double t_to = 0.0;
};

Propagator4 closed_form_propagator(const SystemParams& params, const DriveProfile& drive, double t,
                                   double tau, double step = kDefaultKStep);

// ceil(20 (t - tau) max(kappa, omega_m)), at least one step.
std::size_t default_oracle_steps(const SystemParams& params, double t, double tau);

/// Time-ordered product of exp(M(t, tau_k + h/2) h), later tau on the left.
/// Throws std::invalid_argument when any ||M||_F h exceeds 0.1.
Propagator4 product_integration_propagator(const SystemParams& params, const DriveProfile& drive, double t,
                                           double tau, std::optional<std::size_t> steps = std::nullopt);

// Same product for the generator with outer time `outer_t`, from `from` to `to`.
Mat4 time_ordered_segment(const SystemParams& params, const DriveProfile& drive, double outer_t,
                          double from, double to, std::size_t steps);

enum class PropagatorKind { closed_form, time_ordered, identity };

struct QuadratureGrid {
  double k_step = kDefaultKStep;
  double noise_step = kDefaultNoiseStep;
  // Short windows still get this many noise intervals, so the half-resolution
  // check compares two genuinely resolved grids.
  std::size_t min_intervals = 128;

  QuadratureGrid coarsened() const {
    return {2.0 * k_step, 2.0 * noise_step, std::max<std::size_t>(1, min_intervals / 2)};
  }
};

// Phi(t, tau_i) on the uniform noise grid tau_i = i * step, i = 0..n, with
// n = max(ceil(t / noise_step), min_intervals) for t > 0.
struct PropagatorFamily {
  double t = 0.0;
  double step = 0.0;
  std::vector<double> nodes;
  std::vector<Complex> displacement;
  std::vector<Mat4, Eigen::aligned_allocator<Mat4>> phi;
};

PropagatorFamily propagator_family(const SystemParams& params, const DriveProfile& drive, double t,
                                   const QuadratureGrid& grid, PropagatorKind kind);

}  // namespace optoent
