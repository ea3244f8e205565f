#pragma once

// Dense linear algebra and seeded randomness shared by every module.
//
// Matrices and vectors are Eigen dynamic-size doubles. Rows of a feature or
// gradient matrix are samples, matching the row-vector convention z = x W.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace eagc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values(i)
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
/// Throws SymmetryError when |A - A^T| exceeds 1e-10 * |A| and
/// NumericalError when the solver does not converge.
SymEig sym_eig(const Matrix& a);

/// Solves A X = B for symmetric positive definite A.
///
/// A plain Cholesky factorization is tried first. If it fails (A only
/// semidefinite up to rounding), eps * I with eps = 1e-8 * trace(A) / d is
/// added and the factorization retried; a second failure throws
/// NumericalError.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// True when every entry is finite.
bool all_finite(const Matrix& m);

/// Frobenius norm of A - A^T relative to |A|_F (0 for the zero matrix).
double asymmetry(const Matrix& a);

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Deterministic random source. The engine is mt19937_64, whose output
/// sequence is fixed by the standard; uniform and normal variates are
/// derived here rather than through <random> distributions, whose
/// algorithms are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double normal();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent stream seed from a master seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// rows x cols matrix of N(mean, std^2) draws, filled row by row.
Matrix gaussian(SeededRng& rng, double mean, double std, Eigen::Index rows, Eigen::Index cols);

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> permutation(SeededRng& rng, std::size_t n);

}  // namespace eagc
