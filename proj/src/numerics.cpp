#include "eagc/numerics.hpp"

#include <cmath>
#include <numbers>

#include "eagc/errors.hpp"

namespace eagc {

bool all_finite(const Matrix& m) { return m.allFinite(); }

double asymmetry(const Matrix& a) {
  const double scale = a.norm();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).norm() / scale;
}

SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("sym_eig: matrix is not square");
  if (!a.allFinite()) throw DataError("sym_eig: non-finite entries");
  if (asymmetry(a) > 1e-10) throw SymmetryError("sym_eig: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(a));
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver did not converge");

  // Eigen returns ascending order.
  const Eigen::Index n = a.rows();
  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw ArgumentError("solve_spd: matrix is not square");
  if (b.rows() != a.rows()) throw ArgumentError("solve_spd: right-hand side has wrong row count");
  if (!a.allFinite() || !b.allFinite()) throw DataError("solve_spd: non-finite entries");

  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);

  const double d = static_cast<double>(a.rows());
  const double eps = 1e-8 * a.trace() / d;
  Matrix jittered = a;
  jittered.diagonal().array() += eps;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success || !(eps > 0.0))
    throw NumericalError("solve_spd: matrix is not positive definite");
  return llt.solve(b);
}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("SeededRng::below: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian(SeededRng& rng, double mean, double std, Eigen::Index rows, Eigen::Index cols) {
  if (!(std >= 0.0)) throw ArgumentError("gaussian: standard deviation must be non-negative");
  if (rows < 0 || cols < 0) throw ArgumentError("gaussian: negative shape");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = mean + std * rng.normal();
  return out;
}

std::vector<std::size_t> permutation(SeededRng& rng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace eagc
