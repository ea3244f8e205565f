#include <doctest.h>

#include "eagc/errors.hpp"
#include "eagc/theory.hpp"
#include "support.hpp"

using namespace eagc;
using eagc::testing::random_matrix;
using eagc::testing::random_spd;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

LinearSystemSpec unit_spec(long steps) {
  LinearSystemSpec s;
  s.hessian = diag({1.0, 1.0});
  s.noise_cov = Matrix::Identity(2, 2);
  s.lambda_a = 0.7;
  s.step_size = 0.01;
  s.steps = steps;
  s.seed = 4;
  return s;
}

}  // namespace

TEST_CASE("lyapunov examples and residual") {
  CHECK((lyapunov_solve(diag({1, 2}), 2.0 * Matrix::Identity(2, 2)) - diag({1, 0.5})).norm() <= 1e-14);
  SeededRng rng(2);
  const Matrix rhs = random_spd(rng, 3);
  CHECK((lyapunov_solve(Matrix::Identity(3, 3), rhs) - rhs / 2.0).norm() <= 1e-14);

  for (Eigen::Index n = 1; n <= 16; ++n) {
    const Matrix a = random_spd(rng, n);
    const Matrix r = random_spd(rng, n);
    const Matrix x = lyapunov_solve(a, r);
    CHECK((a * x + x * a - r).norm() <= 1e-8 * r.norm());
  }
}

TEST_CASE("psd_order examples") {
  SeededRng rng(3);
  const Matrix a = random_spd(rng, 3);
  const PsdOrder same = psd_order(a, a);
  CHECK(same.holds);
  CHECK(std::abs(same.margin) <= 1e-12);

  const PsdOrder up = psd_order(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  CHECK(up.holds);
  CHECK(up.margin == doctest::Approx(1.0));

  const PsdOrder down = psd_order(diag({2}), diag({1}));
  CHECK_FALSE(down.holds);
  CHECK(down.margin == doctest::Approx(-1.0));

  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(psd_order(asym, Matrix::Zero(2, 2)), ArgumentError);
}

TEST_CASE("simulate_deviation: noiseless, lambda 0, closed form, determinism") {
  LinearSystemSpec s = unit_spec(20000);
  s.noise_cov = Matrix::Zero(2, 2);
  CHECK(simulate_deviation(s, false).norm() == 0.0);

  LinearSystemSpec z = unit_spec(20000);
  z.lambda_a = 0.0;
  CHECK(simulate_deviation(z, true) == simulate_deviation(z, false));
  CHECK(simulate_deviation(z, false) == simulate_deviation(z, false));

  LinearSystemSpec one;
  one.hessian = diag({1.0});
  one.noise_cov = diag({1.0});
  one.lambda_a = 0.0;
  one.step_size = 0.01;
  one.steps = 1'000'000;
  one.seed = 8;
  CHECK(simulate_deviation(one, false)(0, 0) == doctest::Approx(0.005).epsilon(0.10));
}

TEST_CASE("stability check") {
  LinearSystemSpec s = unit_spec(100);
  s.step_size = 2.5;
  CHECK_THROWS_AS(check_stability(s, false), StabilityError);
  CHECK_THROWS_AS(simulate_deviation(s, false), StabilityError);
  CHECK_THROWS_AS(lemma1_report(s, false), StabilityError);
}

TEST_CASE("lemma1 closed forms") {
  const CovarianceReport r = lemma1_report(unit_spec(1000), false);
  CHECK((r.analytic_cov_base - 0.005 * Matrix::Identity(2, 2)).norm() <= 1e-15);
  CHECK((r.analytic_cov_prox - (0.01 / 3.4) * Matrix::Identity(2, 2)).norm() <= 1e-15);
  CHECK(r.analytic_ordering_holds);
  CHECK(r.psd_margin == doctest::Approx(0.005 - 0.01 / 3.4).epsilon(1e-9));
  // gradient covariances order the other way in this commuting case
  CHECK_FALSE(r.grad_ordering_holds);
  CHECK_FALSE(r.note.empty());

  LinearSystemSpec zero = unit_spec(1000);
  zero.lambda_a = 0.0;
  const CovarianceReport z = lemma1_report(zero, false);
  CHECK(z.analytic_cov_base == z.analytic_cov_prox);
  CHECK(std::abs(z.psd_margin) <= 1e-15);
}

TEST_CASE("deviation ordering is strict on commuting random specs") {
  SeededRng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(6));
    LinearSystemSpec s;
    s.hessian = Matrix::Zero(d, d);
    s.noise_cov = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      s.hessian(i, i) = 0.5 + 1.5 * rng.uniform();
      s.noise_cov(i, i) = 0.5 + 1.5 * rng.uniform();
    }
    s.lambda_a = 0.05 + rng.uniform();
    const CovarianceReport r = lemma1_report(s, false);
    CHECK(r.analytic_ordering_holds);
    CHECK(r.psd_margin > 0.0);
  }
}

TEST_CASE("empirical covariance converges toward the analytic one") {
  LinearSystemSpec s;
  s.hessian = diag({0.7, 1.9, 1.2});
  s.noise_cov = diag({1.5, 0.6, 1.0});
  s.lambda_a = 0.7;
  s.seed = 12;
  s.steps = 10'000;
  const CovarianceReport shortrun = lemma1_report(s, true);
  s.steps = 1'000'000;
  const CovarianceReport longrun = lemma1_report(s, true);
  CHECK(longrun.empirical_rel_error_base < shortrun.empirical_rel_error_base);
  CHECK(longrun.empirical_rel_error_prox < shortrun.empirical_rel_error_prox);
  CHECK(longrun.empirical_ordering_holds);
  CHECK(longrun.deviation_ordering_holds);
}
