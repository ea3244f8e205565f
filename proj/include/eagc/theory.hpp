#pragma once

// Stationary covariance of the linearized feature dynamics around the
// supervised anchor, with and without the proximal (alignment) term:
//   delta_{t+1} = (I - lr (H + lambda I)) delta_t - lr xi_t,  xi ~ N(0, Sigma)
// The truncated stationary equation A Cov + Cov A = lr Sigma is solved in
// closed form in the eigenbasis of A and compared with simulation.

#include <cstdint>
#include <string>

#include "eagc/numerics.hpp"

namespace eagc {

struct LinearSystemSpec {
  Matrix hessian;            // SPD
  double lambda_a = 0.7;
  double step_size = 0.01;   // learning rate of the linear recursion
  Matrix noise_cov;          // SPD (PSD accepted)
  long steps = 1'000'000;
  long burn_in = -1;         // < 0 means steps / 10
  std::uint64_t seed = 0;

  long effective_burn_in() const { return burn_in < 0 ? steps / 10 : burn_in; }
};

/// Throws StabilityError unless every eigenvalue of I - lr (H + lambda I)
/// (lambda = 0 without the proximal term) lies strictly inside (-1, 1).
void check_stability(const LinearSystemSpec& spec, bool with_prox);

/// Sample covariance of delta over the post-burn-in iterates.
Matrix simulate_deviation(const LinearSystemSpec& spec, bool with_prox);

/// Solves A X + X A = rhs for symmetric A with a_i + a_j bounded away from 0.
Matrix lyapunov_solve(const Matrix& a, const Matrix& rhs);

struct PsdOrder {
  bool holds = false;
  double margin = 0.0;  // min eigenvalue of (b - a)
};

/// Loewner order a <= b within tol.
PsdOrder psd_order(const Matrix& a, const Matrix& b, double tol = 1e-12);

struct CovarianceReport {
  Matrix empirical_cov_base;
  Matrix empirical_cov_prox;
  Matrix analytic_cov_base;
  Matrix analytic_cov_prox;
  double psd_margin = 0.0;            // analytic: min eig(base - prox)
  double empirical_margin = 0.0;      // empirical: min eig(base - prox)
  bool analytic_ordering_holds = false;
  bool empirical_ordering_holds = false;
  bool deviation_ordering_holds = false;
  double empirical_rel_error_base = 0.0;
  double empirical_rel_error_prox = 0.0;
  // Gradient covariances H Cov H vs (H + lambda I) Cov' (H + lambda I).
  // Reported only; in the commuting case these order the opposite way.
  Matrix grad_cov_base;
  Matrix grad_cov_prox;
  double grad_margin = 0.0;           // min eig(grad_base - grad_prox)
  bool grad_ordering_holds = false;
  std::string note;
};

/// Analytic covariances plus empirical ones from simulate_deviation. Set
/// `simulate` to false to skip the Markov chains.
CovarianceReport lemma1_report(const LinearSystemSpec& spec, bool simulate = true);

double relative_frobenius_error(const Matrix& estimate, const Matrix& truth);

}  // namespace eagc
