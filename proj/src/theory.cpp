#include "eagc/theory.hpp"

#include <cmath>

#include "eagc/errors.hpp"

namespace eagc {
namespace {

void check_square_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ArgumentError(std::string(what) + " must be square and non-empty");
  if (asymmetry(m) > 1e-10) throw SymmetryError(std::string(what) + " must be symmetric");
}

Matrix drift_matrix(const LinearSystemSpec& spec, bool with_prox) {
  Matrix m = spec.hessian;
  if (with_prox) m.diagonal().array() += spec.lambda_a;
  return m;
}

// Symmetric square root of a PSD matrix.
Matrix psd_sqrt(const Matrix& cov) {
  const SymEig eig = sym_eig(cov);
  if (eig.values.minCoeff() < -1e-12 * std::max(1.0, eig.values.cwiseAbs().maxCoeff()))
    throw ArgumentError("noise covariance must be positive semidefinite");
  return eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.vectors.transpose();
}

}  // namespace

void check_stability(const LinearSystemSpec& spec, bool with_prox) {
  check_square_symmetric(spec.hessian, "hessian");
  if (!(spec.step_size > 0.0)) throw ArgumentError("step size must be positive");
  if (!(spec.lambda_a >= 0.0)) throw ArgumentError("lambda_a must be >= 0");
  const Vector m = sym_eig(drift_matrix(spec, with_prox)).values;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double mult = 1.0 - spec.step_size * m(i);
    if (!(std::abs(mult) < 1.0))
      throw StabilityError("unstable linear system: eigenvalue " + std::to_string(mult) +
                           " of the iteration matrix lies outside (-1, 1)");
  }
}

Matrix simulate_deviation(const LinearSystemSpec& spec, bool with_prox) {
  check_stability(spec, with_prox);
  check_square_symmetric(spec.noise_cov, "noise covariance");
  const Eigen::Index d = spec.hessian.rows();
  if (spec.noise_cov.rows() != d) throw ArgumentError("noise covariance dimension differs from hessian");
  const long burn = spec.effective_burn_in();
  if (spec.steps <= burn + 1) throw ArgumentError("simulate_deviation: need more steps than burn-in");

  const Matrix iter = Matrix::Identity(d, d) - spec.step_size * drift_matrix(spec, with_prox);
  const Matrix noise_scale = spec.step_size * psd_sqrt(spec.noise_cov);

  SeededRng rng(spec.seed);
  Vector delta = Vector::Zero(d);
  Vector next(d), draw(d);
  Vector sum = Vector::Zero(d);
  Matrix outer = Matrix::Zero(d, d);
  long count = 0;
  for (long t = 0; t < spec.steps; ++t) {
    for (Eigen::Index i = 0; i < d; ++i) draw(i) = rng.normal();
    next.noalias() = iter * delta;
    next.noalias() -= noise_scale * draw;
    delta.swap(next);
    if (t >= burn) {
      sum += delta;
      outer.selfadjointView<Eigen::Lower>().rankUpdate(delta);
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  const Vector mean = sum / n;
  Matrix cov = outer.selfadjointView<Eigen::Lower>();
  cov = (cov - n * mean * mean.transpose()) / (n - 1.0);
  return symmetrized(cov);
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& rhs) {
  check_square_symmetric(a, "lyapunov_solve: A");
  if (rhs.rows() != a.rows() || rhs.cols() != a.cols()) throw ArgumentError("lyapunov_solve: rhs shape mismatch");
  const SymEig eig = sym_eig(a);
  const Matrix& v = eig.vectors;
  Matrix t = v.transpose() * rhs * v;
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      const double denom = eig.values(i) + eig.values(j);
      if (std::abs(denom) <= 1e-14 * scale) throw NumericalError("lyapunov_solve: a_i + a_j vanishes");
      t(i, j) /= denom;
    }
  return v * t * v.transpose();
}

PsdOrder psd_order(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ArgumentError("psd_order: shape mismatch");
  check_square_symmetric(a, "psd_order: A");
  check_square_symmetric(b, "psd_order: B");
  PsdOrder out;
  out.margin = sym_eig(symmetrized(b - a)).values.minCoeff();
  out.holds = out.margin >= -tol;
  return out;
}

double relative_frobenius_error(const Matrix& estimate, const Matrix& truth) {
  const double n = truth.norm();
  if (!(n > 0.0)) return estimate.norm();
  return (estimate - truth).norm() / n;
}

CovarianceReport lemma1_report(const LinearSystemSpec& spec, bool simulate) {
  check_stability(spec, false);
  check_stability(spec, true);
  check_square_symmetric(spec.noise_cov, "noise covariance");

  const Matrix rhs = spec.step_size * spec.noise_cov;
  const Matrix m_base = drift_matrix(spec, false);
  const Matrix m_prox = drift_matrix(spec, true);

  CovarianceReport r;
  r.analytic_cov_base = symmetrized(lyapunov_solve(m_base, rhs));
  r.analytic_cov_prox = symmetrized(lyapunov_solve(m_prox, rhs));
  const double tol = 1e-12 * std::max(1.0, r.analytic_cov_base.norm());
  const PsdOrder analytic = psd_order(r.analytic_cov_prox, r.analytic_cov_base, tol);
  r.psd_margin = analytic.margin;
  r.analytic_ordering_holds = analytic.holds;

  if (simulate) {
    r.empirical_cov_base = simulate_deviation(spec, false);
    r.empirical_cov_prox = simulate_deviation(spec, true);
    // Sampling error of the chains is a few percent of the covariance scale.
    const PsdOrder empirical = psd_order(r.empirical_cov_prox, r.empirical_cov_base, 0.05 * r.analytic_cov_base.norm());
    r.empirical_margin = empirical.margin;
    r.empirical_ordering_holds = empirical.holds;
    r.empirical_rel_error_base = relative_frobenius_error(r.empirical_cov_base, r.analytic_cov_base);
    r.empirical_rel_error_prox = relative_frobenius_error(r.empirical_cov_prox, r.analytic_cov_prox);
  } else {
    r.empirical_ordering_holds = true;
  }
  r.deviation_ordering_holds = r.analytic_ordering_holds && r.empirical_ordering_holds;

  r.grad_cov_base = symmetrized(m_base * r.analytic_cov_base * m_base);
  r.grad_cov_prox = symmetrized(m_prox * r.analytic_cov_prox * m_prox);
  const PsdOrder grad = psd_order(r.grad_cov_prox, r.grad_cov_base, tol);
  r.grad_margin = grad.margin;
  r.grad_ordering_holds = grad.holds;
  if (!grad.holds)
    r.note = "gradient covariance (H+lambda I) Cov' (H+lambda I) is not below H Cov H; "
             "only the deviation covariance ordering follows from the stationary equations";
  return r;
}

}  // namespace eagc
