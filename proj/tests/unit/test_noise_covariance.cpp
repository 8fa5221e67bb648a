#include "optoent/noise_covariance.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace optoent;
using oracle::reference_params;

namespace {

// r \int_{max(tau1, tau2)}^t e^{-r (s - tau1)/2} e^{-r (s - tau2)/2} ds, the
// white-noise delta correlation integrated over both exponential windows.
double kernel_by_quadrature(double rate, double t, double tau1, double tau2) {
  return rate * oracle::integrate_real(
                    [&](double s) { return std::exp(-0.5 * rate * (s - tau1)) * std::exp(-0.5 * rate * (s - tau2)); },
                    std::max(tau1, tau2), t);
}

template <typename M>
double max_abs(const Eigen::MatrixBase<M>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("colored kernel matches its defining integral") {
  for (double rate : {1.0, 0.3, 2.5e-7}) {
    for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{1.0, 4.0}, std::pair{7.5, 2.0}, std::pair{9.9, 9.9}}) {
      const double expected = kernel_by_quadrature(rate, 10.0, a, b);
      CHECK(colored_kernel(rate, 10.0, a, b) == doctest::Approx(expected).epsilon(1e-12).scale(1e-300));
    }
  }
}

TEST_CASE("kernel limits") {
  const double t = 8.0;
  SUBCASE("equal times give the decayed-mode commutator deficit") {
    for (double tau : {0.0, 2.0, 7.0}) CHECK(colored_kernel(1.0, t, tau, tau) == doctest::Approx(1.0 - std::exp(-(t - tau))));
  }
  SUBCASE("vanishes at the outer time") { CHECK(colored_kernel(1.0, t, 3.0, t) == 0.0); }
  SUBCASE("long windows keep only the stationary exponential") {
    CHECK(colored_kernel(1.0, 200.0, 1.0, 3.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  }
  SUBCASE("no coupling, no kernel") { CHECK(colored_kernel(0.0, t, 1.0, 2.0) == 0.0); }
}

TEST_CASE("kernel sets carry the occupation factors") {
  auto p = reference_params(-1.0, 4.0);
  p.n_c = 0.0;
  const auto k = base_kernels(p, 10.0);
  CHECK(k.mech_sym(2.0, 3.0) == doctest::Approx(4.5 * colored_kernel(p.gamma_m, 10.0, 2.0, 3.0)));
  CHECK(k.cav_sym(2.0, 3.0) == doctest::Approx(0.5 * colored_kernel(1.0, 10.0, 2.0, 3.0)));
  CHECK_THROWS_AS(base_kernels(p, 0.0), std::invalid_argument);
}

TEST_CASE("kernel is positive semidefinite on a grid") {
  const int n = 60;
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = colored_kernel(1.0, 6.0, 0.1 * i, 0.1 * j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("Monte Carlo kernel estimate") {
  KernelCheckOptions o;
  o.samples = 10000;
  o.seed = 5;
  SUBCASE("within five standard errors for rate * t = 1") {
    const auto r = monte_carlo_kernel_check(1.0, 0.0, 1.0, o);
    CHECK(r.samples == 10000);
    CHECK(r.consistent(5.0));
    const auto thermal = monte_carlo_kernel_check(0.5, 2.0, 2.0, o);
    CHECK(thermal.consistent(5.0));
  }
  SUBCASE("standard error shrinks by sqrt 2 when samples double") {
    const auto a = monte_carlo_kernel_check(1.0, 0.0, 1.0, o);
    o.samples = 20000;
    const auto b = monte_carlo_kernel_check(1.0, 0.0, 1.0, o);
    CHECK(a.mean_standard_error / b.mean_standard_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  }
  SUBCASE("zero coupling estimates zero") {
    const auto r = monte_carlo_kernel_check(0.0, 0.0, 1.0, o);
    CHECK(r.max_abs_deviation == 0.0);
    CHECK(r.consistent(5.0));
  }
  SUBCASE("seeded runs repeat exactly") {
    const auto a = monte_carlo_kernel_check(1.0, 0.0, 1.0, o);
    const auto b = monte_carlo_kernel_check(1.0, 0.0, 1.0, o);
    CHECK(a.max_z == b.max_z);
    CHECK(a.max_abs_deviation == b.max_abs_deviation);
  }
  SUBCASE("system overload uses the mechanical and cavity rates") {
    auto p = reference_params(-1.0);
    p.gamma_m = 1.0;
    const auto r = monte_carlo_kernel_check(p, 1.0, o);
    CHECK(r.mechanical.rate == 1.0);
    CHECK(r.cavity.rate == p.kappa);
    CHECK(r.mechanical.consistent());
    CHECK(r.cavity.consistent());
  }
}

TEST_CASE("feeds follow the cross-driving pattern") {
  const auto p = reference_params(-1.0);
  const Complex d{1.3e5, -4.1e4};
  const Feed fm = mechanical_feed(p, d, 10.0, 3.0);
  const Feed fc = cavity_feed(p, d, 10.0, 3.0);
  CHECK(fm.bottomRows<2>().isZero(0.0));
  CHECK(fc.topRows<2>().isZero(0.0));
  CHECK(fm.topRows<2>().cwiseAbs().maxCoeff() > 0.0);
  // Same coefficient pattern as the generator, with the single-mode envelope.
  const auto c = coupling_coeffs(p, d, 3.0, std::exp(-0.5 * p.kappa * 7.0));
  CHECK(fm(1, 0) == c.l1);
  CHECK(fm(0, 1) == c.l4);
  const Vec4 fd = drive_feed(p, d, 10.0, 3.0);
  CHECK(fd.head<2>().isZero(0.0));
  CHECK(fd(3) == doctest::Approx(std::sqrt(2.0) * p.g * std::norm(d) * std::cos(7.5) *
                                 std::exp(-0.5 * p.gamma_m * 7.0)));
}

TEST_CASE("noise covariance trivial limits") {
  auto p = reference_params(-1.0);
  NoiseCovarianceOptions o;
  CHECK(covariance_noise(p, CwDrive{0.0}, 5.0, o).v2.isZero(0.0));
  p.g = 0.0;
  CHECK(covariance_noise(p, CwDrive{3e5}, 5.0, o).v2.isZero(0.0));
}

TEST_CASE("running sums equal the direct double sum") {
  for (double ratio : {-1.0, 1.5}) {
    const auto p = reference_params(ratio, 3.0);
    const auto fam = propagator_family(p, CwDrive{2e6}, 6.0, QuadratureGrid{}, PropagatorKind::closed_form);
    const Mat4 fast = noise_covariance_from_family(p, fam, Accumulation::running_sum);
    const Mat4 slow = noise_covariance_from_family(p, fam, Accumulation::direct);
    CHECK(max_abs(fast - slow) <= 1e-8 * max_abs(slow));
  }
}

TEST_CASE("noise covariance is symmetric, positive and converged") {
  const auto p = reference_params(-1.0);
  const auto r = covariance_noise(p, CwDrive{3e5}, 15.0);
  CHECK((r.v2 - r.v2.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * max_abs(r.v2));
  const Eigen::SelfAdjointEigenSolver<Mat4> es(r.v2);
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  CHECK(r.convergence_delta > 0.0);
  CHECK(r.convergence_delta < 1e-3);
}

TEST_CASE("coarse grids fail the half-resolution check") {
  const auto p = reference_params(-1.0);
  NoiseCovarianceOptions o;
  o.grid.noise_step = 0.1;
  o.grid.min_intervals = 1;
  CHECK_THROWS_AS(covariance_noise(p, CwDrive{2e6}, 15.0, o), ConvergenceError);
}

TEST_CASE("identity propagator isolates the cross-driving blocks") {
  const auto p = reference_params(-1.0, 2.0);
  NoiseCovarianceOptions o;
  o.propagator = PropagatorKind::identity;
  o.check_convergence = false;
  const Mat4 v2 = covariance_noise(p, CwDrive{3e5}, 5.0, o).v2;
  CHECK(v2.topRightCorner<2, 2>().isZero(0.0));
  CHECK(max_abs(v2.topLeftCorner<2, 2>()) > 0.0);
  CHECK(max_abs(v2.bottomRightCorner<2, 2>()) > 0.0);

  // Only the thermal mechanical bath enters the cavity block.
  auto hot = p;
  hot.n_m = 5.0;
  const Mat4 v2_hot = covariance_noise(hot, CwDrive{3e5}, 5.0, o).v2;
  CHECK((v2_hot.bottomRightCorner<2, 2>() - v2.bottomRightCorner<2, 2>()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(v2_hot(0, 0) == doctest::Approx(v2(0, 0) * 5.5 / 2.5).epsilon(1e-12));
}

TEST_CASE("noise covariance scales with g squared") {
  auto p = reference_params(-1.0);
  NoiseCovarianceOptions o;
  o.check_convergence = false;
  SUBCASE("exactly, with the propagator switched off") {
    o.propagator = PropagatorKind::identity;
    const Mat4 full = covariance_noise(p, CwDrive{3e5}, 10.0, o).v2;
    p.g *= 0.5;
    const Mat4 half = covariance_noise(p, CwDrive{3e5}, 10.0, o).v2;
    CHECK(max_abs(full - 4.0 * half) <= 1e-12 * max_abs(full));
  }
  SUBCASE("to leading order in the mechanical block when the coupling is weak") {
    // The cavity block is fed directly only by the mechanical bath, whose
    // kernel carries a factor gamma_m t; its g^4 term through the propagator dominates.
    const Mat4 full = covariance_noise(p, CwDrive{3e4}, 10.0, o).v2;
    p.g *= 0.5;
    const Mat4 half = covariance_noise(p, CwDrive{3e4}, 10.0, o).v2;
    CHECK(full(2, 2) / half(2, 2) == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(full(3, 3) / half(3, 3) == doctest::Approx(4.0).epsilon(1e-3));
  }
}

TEST_CASE("mean trajectory equals direct integration of the mean equation") {
  const auto p = reference_params(-1.0);
  const DriveProfile drive = CwDrive{3e5};
  const std::vector<double> times{2.0, 7.5};
  QuadratureGrid fine;
  fine.noise_step = 1e-3;
  const auto means = mean_trajectory(p, drive, times, fine, PropagatorKind::time_ordered);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    auto rhs = [&](double tau, const Vec4& v) -> Vec4 {
      tau = std::min(tau, t);
      const Complex d = eval_displacement(p, drive, tau);
      return generator(p, drive, t, tau) * v + drive_feed(p, d, t, tau);
    };
    const Vec4 ode = oracle::rk4(rhs, Vec4::Zero(), 0.0, t, static_cast<int>(4000 * t));
    CHECK((means[k] - ode).norm() <= 1e-6 * ode.norm());
  }

  CHECK(mean_trajectory(p, CwDrive{0.0}, times)[1].isZero(0.0));
  auto q = p;
  q.g = 0.0;
  CHECK(mean_trajectory(q, drive, times)[1].isZero(0.0));
}
