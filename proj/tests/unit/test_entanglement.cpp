#include "optoent/entanglement.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace optoent;
using oracle::reference_params;

namespace {

Mat4 two_mode_squeezed(double r, double n = 0.0) {
  const double c = (n + 0.5) * std::cosh(2.0 * r), s = (n + 0.5) * std::sinh(2.0 * r);
  Mat4 v;
  v << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return v;
}

Eigen::Matrix2d single_mode(double theta, double squeeze) {
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return rot * Eigen::Vector2d(std::exp(squeeze), std::exp(-squeeze)).asDiagonal();
}

Mat4 local(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  Mat4 s = Mat4::Zero();
  s.topLeftCorner<2, 2>() = a;
  s.bottomRightCorner<2, 2>() = b;
  return s;
}

// Smallest modulus among the eigenvalues of i J V~, V~ the transposed matrix
// with p_m -> -p_m.
double transposed_by_eigen(const Mat4& v) {
  const Mat4 p = Eigen::Vector4d(1, 1, 1, -1).asDiagonal();
  const Eigen::Matrix4cd m = Eigen::Matrix4cd(symplectic_form().cast<std::complex<double>>()) *
                             (p * v * p).cast<std::complex<double>>() * std::complex<double>(0.0, 1.0);
  return m.eigenvalues().cwiseAbs().minCoeff();
}

// A random physical state: a random local transformation of a noisy
// two-mode squeezed state.
Mat4 random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Mat4 s = local(single_mode(6.3 * u(rng), u(rng) - 0.5), single_mode(6.3 * u(rng), u(rng) - 0.5));
  const Mat4 v = two_mode_squeezed(1.5 * u(rng), 0.3 * u(rng)) + 0.2 * u(rng) * Mat4::Identity();
  return s * v * s.transpose();
}

}  // namespace

TEST_CASE("vacuum and product states are not entangled") {
  CHECK(log_negativity(CovMatrix4(0.5 * Mat4::Identity())) == 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Mat4 v = Mat4::Zero();
    const Eigen::Matrix2d a = single_mode(6.3 * u(rng), 2.0 * u(rng) - 1.0);
    const Eigen::Matrix2d b = single_mode(6.3 * u(rng), 2.0 * u(rng) - 1.0);
    v.topLeftCorner<2, 2>() = (0.5 + 3.0 * u(rng)) * a * a.transpose();
    v.bottomRightCorner<2, 2>() = (0.5 + 3.0 * u(rng)) * b * b.transpose();
    CHECK(log_negativity(CovMatrix4(0.5 * (v + v.transpose()))) == 0.0);
  }
}

TEST_CASE("two-mode squeezed vacuum has E_N = 2r") {
  for (double r : {0.05, 0.4, 1.0, 2.3}) {
    const CovMatrix4 v(two_mode_squeezed(r));
    CHECK(smallest_transposed_eigenvalue(v) == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-10));
    CHECK(log_negativity(v) == doctest::Approx(2.0 * r).epsilon(1e-9));
    const auto nu = v.symplectic_eigenvalues();
    CHECK(nu[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.is_physical());
  }
}

TEST_CASE("stable eta form agrees with the discriminant formula and an eigenvalue oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const CovMatrix4 v(random_state(rng));
    const Mat4& m = v.matrix();
    const double sigma = v.cavity().determinant() + v.mechanics().determinant() - 2.0 * v.cross().determinant();
    const double textbook = std::sqrt(sigma - std::sqrt(sigma * sigma - 4.0 * m.determinant())) / std::sqrt(2.0);
    const double eta = smallest_transposed_eigenvalue(v);
    CHECK(eta == doctest::Approx(transposed_by_eigen(m)).epsilon(1e-9));
    CHECK(eta == doctest::Approx(textbook).epsilon(1e-6));
  }
}

TEST_CASE("E_N is invariant under local symplectic maps") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Mat4 v = random_state(rng);
    const Mat4 s = local(single_mode(6.3 * u(rng), 1.6 * u(rng) - 0.8), single_mode(6.3 * u(rng), 1.6 * u(rng) - 0.8));
    Mat4 moved = s * v * s.transpose();
    moved = 0.5 * (moved + moved.transpose());
    CHECK(std::abs(log_negativity(CovMatrix4(moved)) - log_negativity(CovMatrix4(v))) < 1e-9);
    CHECK(std::abs(negativity_exponent(CovMatrix4(moved)) - negativity_exponent(CovMatrix4(v))) < 1e-9);
  }
}

TEST_CASE("added classical noise never increases E_N") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    const Mat4 v = random_state(rng);
    double previous = log_negativity(CovMatrix4(v));
    for (double alpha : {1e-3, 1e-2, 0.1, 1.0}) {
      const double noisy = log_negativity(CovMatrix4(v + alpha * Mat4::Identity()));
      CHECK(noisy <= previous + 1e-12);
      previous = noisy;
    }
  }
}

TEST_CASE("unphysical input is reported") {
  Mat4 v = Mat4::Zero();
  v.diagonal() << 0.1, 0.1, 0.5, 0.5;
  CHECK_FALSE(CovMatrix4(v).is_physical());
  CHECK_THROWS_AS(log_negativity(CovMatrix4(v)), PhysicalityError);
  Mat4 skew = 0.5 * Mat4::Identity();
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS(CovMatrix4{skew}, std::invalid_argument);
}

TEST_CASE("initial state and cavity occupation") {
  auto p = reference_params(-1.0, 1e4);
  const CovMatrix4 v0 = initial_covariance(p);
  CHECK(v0(2, 2) == 10000.5);
  CHECK(v0(3, 3) == 10000.5);
  CHECK(v0(0, 0) == 0.5);
  CHECK(v0.matrix().isDiagonal(0.0));
  CHECK(log_negativity(v0) == 0.0);
  CHECK(v0.symplectic_eigenvalues()[1] == doctest::Approx(10000.5));
  CHECK(cavity_fluctuation_number(v0) == 0.0);
  Mat4 thermal = 0.5 * Mat4::Identity();
  thermal(0, 0) = thermal(1, 1) = 3.5;
  CHECK(cavity_fluctuation_number(CovMatrix4(thermal)) == doctest::Approx(3.0));
}

TEST_CASE("evolution trivial limits") {
  auto p = reference_params(-1.0, 2.0);
  const auto at_zero = evolve_state(p, CwDrive{3e5}, 0.0);
  CHECK(at_zero.covariance.matrix().isApprox(initial_covariance(p).matrix(), 0.0));
  CHECK(at_zero.mean.isZero(0.0));
  p.g = 0.0;
  CHECK(evolve_covariance(p, CwDrive{3e5}, 9.0).matrix().isApprox(initial_covariance(p).matrix(), 1e-15));
  CHECK_THROWS_AS(evolve_state(p, CwDrive{3e5}, -1.0), std::invalid_argument);
}

TEST_CASE("evolved states stay physical at strong drive") {
  for (double ratio : {-0.5, -1.0, 1.5}) {
    const auto p = reference_params(ratio);
    for (double t : {0.5, 3.0, 9.0, 15.0}) {
      const auto s = evolve_state(p, CwDrive{2e6}, t);
      CHECK(s.covariance.is_physical());
      CHECK(s.convergence_delta < 1e-3);
    }
  }
}

TEST_CASE("noise-free evolution is a pure-state symplectic map") {
  const auto p = reference_params(1.0);
  EvolveOptions o;
  o.include_noise = false;
  const auto s = evolve_state(p, CwDrive{2e6}, 15.0, o);
  CHECK(s.covariance.symplectic_eigenvalues()[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(s.covariance.symplectic_eigenvalues()[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(log_negativity(s.covariance) > 0.0);
}

TEST_CASE("trace output does not depend on the thread count") {
  const auto p = reference_params(-1.0);
  const auto times = uniform_times(15.0, 9);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == 15.0);
  const auto one = compute_trace(p, CwDrive{3e5}, times, {}, 1);
  const auto many = compute_trace(p, CwDrive{3e5}, times, {}, 4);
  CHECK(one.log_negativity == many.log_negativity);
  CHECK(one.exponent == many.exponent);
  CHECK(one.cavity_fluctuation == many.cavity_fluctuation);
  CHECK(one.max_convergence_delta == many.max_convergence_delta);
  for (double e : one.log_negativity) CHECK(e >= 0.0);
  CHECK(uniform_times(1.0, 0).empty());
  CHECK(uniform_times(4.0, 1) == std::vector<double>{4.0});
}
