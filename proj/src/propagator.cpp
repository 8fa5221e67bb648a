#include "optoent/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optoent {

namespace {

constexpr double kSeriesThreshold = 1e-12;
constexpr double kStructureTol = 1e-9;
constexpr double kMaxOracleStepNorm = 0.1;

std::size_t intervals_for(double span, double step) {
  if (span <= 0.0) return 0;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / step - 1e-9)));
}

double generator_envelope(const SystemParams& p, double t, double tau) {
  return std::exp(-0.5 * (p.kappa + p.gamma_m) * (t - tau));
}

}  // namespace

GeneratorCoeffs coupling_coeffs(const SystemParams& params, Complex displacement, double tau,
                                double envelope) {
  const double c = std::cos(params.omega_m * tau);
  const double s = std::sin(params.omega_m * tau);
  const double re = 2.0 * params.g * envelope * displacement.real();
  const double im = -2.0 * params.g * envelope * displacement.imag();
  return {re * c, re * s, im * c, im * s};
}

GeneratorCoeffs generator_coeffs(const SystemParams& params, Complex displacement, double t, double tau) {
  return coupling_coeffs(params, displacement, tau, generator_envelope(params, t, tau));
}

Mat4 generator_matrix(const GeneratorCoeffs& c) {
  Mat4 m;
  m << 0.0, 0.0, c.l3, c.l4,
       0.0, 0.0, c.l1, c.l2,
       -c.l2, c.l4, 0.0, 0.0,
       c.l1, -c.l3, 0.0, 0.0;
  return m;
}

Mat4 generator(const SystemParams& params, const DriveProfile& drive, double t, double tau) {
  if (tau < 0.0 || tau > t) throw std::invalid_argument("generator: require 0 <= tau <= t");
  return generator_matrix(generator_coeffs(params, eval_displacement(params, drive, tau), t, tau));
}

const Mat4& symplectic_form() {
  static const Mat4 j = [] {
    Mat4 m = Mat4::Zero();
    m(0, 1) = 1.0;
    m(1, 0) = -1.0;
    m(2, 3) = 1.0;
    m(3, 2) = -1.0;
    return m;
  }();
  return j;
}

double symplectic_defect(const Mat4& phi) {
  const Mat4& j = symplectic_form();
  return (phi * j * phi.transpose() - j).norm();
}

Mat4 hamiltonian_matrix(const Mat4& generator) { return -symplectic_form() * generator; }

double square_scalar(const Mat4& k) {
  const double l1 = k(1, 2);
  const double l2 = k(1, 3);
  const double l3 = k(0, 2);
  const double l4 = k(0, 3);
  const double sq = std::norm(Complex{l1 + l4, l2 - l3});
  const double bs = std::norm(Complex{l1 - l4, -(l2 + l3)});
  return 0.25 * sq - 0.25 * bs;
}

KIntegral k_integral(const SystemParams& params, const DriveProfile& drive, double t, double tau,
                     double step) {
  if (tau < 0.0 || tau > t) throw std::invalid_argument("k_integral: require 0 <= tau <= t");
  KIntegral out;
  out.k.setZero();
  const std::size_t n = intervals_for(t - tau, step);
  if (n > 0) {
    const double h = (t - tau) / static_cast<double>(n);
    const auto d = displacement_on_grid(params, drive, tau, h, n);
    for (std::size_t i = 0; i <= n; ++i) {
      const double node = tau + i * h;
      const double w = (i == 0 || i == n) ? 0.5 * h : h;
      out.k += w * generator_matrix(generator_coeffs(params, d[i], t, node));
    }
  }
  out.m = square_scalar(out.k);
  const Mat4 residual = out.k * out.k - out.m * Mat4::Identity();
  const double scale = std::max(std::abs(out.m), out.k.cwiseAbs().maxCoeff() * out.k.cwiseAbs().maxCoeff());
  out.structure_residual = scale > 0.0 ? residual.cwiseAbs().maxCoeff() / scale : 0.0;
  if (out.structure_residual > kStructureTol) {
    std::ostringstream msg;
    msg << "K^2 != m I: relative residual " << out.structure_residual << " at (t, tau) = (" << t << ", "
        << tau << ")";
    throw StructureError(msg.str());
  }
  return out;
}

Mat4 commuting_exponential(const Mat4& k, double m) {
  double even = 1.0;  // cosh(sqrt m)
  double odd = 1.0;   // sinh(sqrt m) / sqrt m
  if (std::abs(m) < kSeriesThreshold) {
    even = 1.0 + m / 2.0 + m * m / 24.0;
    odd = 1.0 + m / 6.0 + m * m / 120.0;
  } else if (m > 0.0) {
    const double r = std::sqrt(m);
    even = std::cosh(r);
    odd = std::sinh(r) / r;
  } else {
    const double r = std::sqrt(-m);
    even = std::cos(r);
    odd = std::sin(r) / r;
  }
  return even * Mat4::Identity() + odd * k;
}

Propagator4 closed_form_propagator(const SystemParams& params, const DriveProfile& drive, double t,
                                   double tau, double step) {
  const KIntegral k = k_integral(params, drive, t, tau, step);
  return {commuting_exponential(k.k, k.m), tau, t};
}

std::size_t default_oracle_steps(const SystemParams& params, double t, double tau) {
  const double rate = std::max(params.kappa, params.omega_m);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(20.0 * (t - tau) * rate)));
}

Mat4 time_ordered_segment(const SystemParams& params, const DriveProfile& drive, double outer_t,
                          double from, double to, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("time_ordered_segment: steps must be >= 1");
  if (from < 0.0 || from > to || to > outer_t) {
    throw std::invalid_argument("time_ordered_segment: require 0 <= from <= to <= outer_t");
  }
  Mat4 phi = Mat4::Identity();
  if (to == from) return phi;
  const double h = (to - from) / static_cast<double>(steps);
  // Midpoints sit on the odd nodes of a half-step grid.
  const auto d = displacement_on_grid(params, drive, from, 0.5 * h, 2 * steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double mid = from + (k + 0.5) * h;
    const Mat4 m = generator_matrix(generator_coeffs(params, d[2 * k + 1], outer_t, mid));
    if (m.norm() * h > kMaxOracleStepNorm) {
      std::ostringstream msg;
      msg << "product integration step too coarse: ||M|| dtau = " << m.norm() * h << " > "
          << kMaxOracleStepNorm << " (use more steps)";
      throw std::invalid_argument(msg.str());
    }
    const Mat4 local = (m * h).exp();
    phi = local * phi;
  }
  return phi;
}

Propagator4 product_integration_propagator(const SystemParams& params, const DriveProfile& drive, double t,
                                           double tau, std::optional<std::size_t> steps) {
  if (tau < 0.0 || tau > t) {
    throw std::invalid_argument("product_integration_propagator: require 0 <= tau <= t");
  }
  const std::size_t n = steps.value_or(default_oracle_steps(params, t, tau));
  return {time_ordered_segment(params, drive, t, tau, t, n), tau, t};
}

PropagatorFamily propagator_family(const SystemParams& params, const DriveProfile& drive, double t,
                                   const QuadratureGrid& grid, PropagatorKind kind) {
  if (t < 0.0) throw std::invalid_argument("propagator_family: t must be non-negative");
  if (!(grid.k_step > 0.0) || !(grid.noise_step > 0.0)) {
    throw std::invalid_argument("propagator_family: grid steps must be positive");
  }
  PropagatorFamily fam;
  fam.t = t;
  const std::size_t n = t > 0.0 ? std::max(intervals_for(t, grid.noise_step), grid.min_intervals) : 0;
  // Fine K steps per noise interval, no coarser than k_step.
  const std::size_t sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(t / static_cast<double>(std::max<std::size_t>(n, 1)) / grid.k_step - 1e-9)));
  const std::size_t fine = n * sub;
  fam.step = n > 0 ? t / static_cast<double>(n) : 0.0;
  const double hf = n > 0 ? fam.step / static_cast<double>(sub) : 0.0;

  fam.nodes.resize(n + 1);
  fam.displacement.resize(n + 1);
  fam.phi.assign(n + 1, Mat4::Identity());
  for (std::size_t i = 0; i <= n; ++i) fam.nodes[i] = i * fam.step;
  if (n == 0) {
    fam.displacement[0] = eval_displacement(params, drive, 0.0);
    return fam;
  }

  switch (kind) {
    case PropagatorKind::identity:
    case PropagatorKind::closed_form: {
      const auto d = displacement_on_grid(params, drive, hf, fine);
      for (std::size_t i = 0; i <= n; ++i) fam.displacement[i] = d[i * sub];
      if (kind == PropagatorKind::identity) break;
      // Backward cumulative trapezoid: K(t, tau_j) = K(t, tau_{j+1}) + h (M_j + M_{j+1}) / 2.
      Mat4 k = Mat4::Zero();
      Mat4 next = generator_matrix(generator_coeffs(params, d[fine], t, t));
      for (std::size_t j = fine; j-- > 0;) {
        const Mat4 cur = generator_matrix(generator_coeffs(params, d[j], t, j * hf));
        k += 0.5 * hf * (cur + next);
        next = cur;
        if (j % sub == 0) fam.phi[j / sub] = commuting_exponential(k, square_scalar(k));
      }
      break;
    }
    case PropagatorKind::time_ordered: {
      const auto d = displacement_on_grid(params, drive, 0.5 * hf, 2 * fine);
      for (std::size_t i = 0; i <= n; ++i) fam.displacement[i] = d[2 * i * sub];
      Mat4 phi = Mat4::Identity();
      for (std::size_t j = fine; j-- > 0;) {
        const double mid = (j + 0.5) * hf;
        const Mat4 m = generator_matrix(generator_coeffs(params, d[2 * j + 1], t, mid));
        phi = phi * (m * hf).exp();
        if (j % sub == 0) fam.phi[j / sub] = phi;
      }
      break;
    }
  }
  return fam;
}

}  // namespace optoent
