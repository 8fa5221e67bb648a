#include "optoent/thermal_oracle.hpp"

#include <doctest.h>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>
#include <utility>

using namespace optoent;

namespace {

// Birth-death generator with a reflecting top level, exponentiated directly.
Eigen::VectorXd populations_by_expm(double n_m, double n_th, double gamma, double t, std::size_t n_max) {
  const int n = static_cast<int>(n_max) + 1;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double down = gamma * (n_th + 1.0) * k;
    const double up = k + 1 < n ? gamma * n_th * (k + 1) : 0.0;
    if (k > 0) q(k - 1, k) += down;
    if (k + 1 < n) q(k + 1, k) += up;
    q(k, k) -= down + up;
  }
  const auto p0 = thermal_populations(n_m, n_max);
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p0.data(), n);
  return (q * t).exp() * v;
}

}  // namespace

TEST_CASE("thermal populations are geometric") {
  const auto p = thermal_populations(2.0, 400);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  for (std::size_t k = 0; k + 1 < 30; ++k) CHECK(p[k + 1] / p[k] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  double mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mean += k * p[k];
  CHECK(mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(default_fock_cutoff(5.0, 1.0) == 70);
  CHECK(default_fock_cutoff(0.0, 0.0) == 20);
}

TEST_CASE("equilibrium is stationary") {
  for (auto [n, t] : {std::pair{0.5, 5.0}, std::pair{3.0, 5.0}, std::pair{50.0, 0.5}}) {
    const auto s = relax_occupation(n, n, 1.0, t);
    CHECK(std::abs(s.occupation - n) < 1e-10);
    CHECK(s.trace_error < 1e-8);
    CHECK_FALSE(s.truncation_flag);
  }
}

TEST_CASE("vacuum stays vacuum") {
  const auto s = relax_occupation(0.0, 0.0, 1.0, 10.0);
  CHECK(s.populations[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.occupation < 1e-15);
}

TEST_CASE("relaxation matches the exact generator and stays geometric") {
  const double gamma = 0.7, t = 2.0 / 0.7;
  const auto s = relax_occupation(5.0, 0.0, gamma, t);
  const Eigen::VectorXd ref = populations_by_expm(5.0, 0.0, gamma, t, s.n_max);
  for (std::size_t k = 0; k < 20; ++k) CHECK(std::abs(s.populations[k] - ref(k)) < 1e-9);
  CHECK(s.occupation == doctest::Approx(closed_form_occupation(5.0, 0.0, gamma, t)).epsilon(1e-8));
  CHECK(s.trace_error < 1e-8);
  CHECK(s.ratio_spread < 1e-6);
}

TEST_CASE("heating from a colder state") {
  const auto s = relax_occupation(1.0, 4.0, 1.0, 0.8);
  CHECK(s.occupation == doctest::Approx(closed_form_occupation(1.0, 4.0, 1.0, 0.8)).epsilon(1e-8));
  CHECK(s.ratio_spread < 1e-6);
}

TEST_CASE("the cutoff grows until the top level is empty") {
  RelaxOptions o;
  const auto s = relax_occupation(30.0, 30.0, 1.0, 0.5, o);
  CHECK(s.n_max >= default_fock_cutoff(30.0, 30.0));
  CHECK(s.populations.back() * (s.n_max + 1) <= o.truncation_tol);
}

TEST_CASE("measured relaxation rate") {
  const auto probe = relaxation_exponent(5.0, 0.0, 0.3, 2.0 / 0.3);
  CHECK(probe.rate_ratio() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(probe.fit_residual < 1e-6);
  CHECK(probe.times.size() == probe.occupations.size());
}
