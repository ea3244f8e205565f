#include "eagc/subspace.hpp"

#include <cmath>
#include <string>

#include "eagc/errors.hpp"

namespace eagc {
namespace {

void check_features(const Matrix& features, const char* what) {
  if (features.rows() < 1 || features.cols() < 1)
    throw ArgumentError(std::string(what) + ": empty feature matrix");
  if (!features.allFinite()) throw DataError(std::string(what) + ": non-finite feature entries");
}

}  // namespace

Matrix correlation(const Matrix& features) {
  check_features(features, "correlation");
  return (features.transpose() * features) / static_cast<double>(features.rows());
}

Conceptor build_conceptor(const Matrix& features, double aperture) {
  check_features(features, "build_conceptor");
  if (!(aperture > 0.0) || !std::isfinite(aperture))
    throw ArgumentError("build_conceptor: aperture must be positive and finite");

  const Matrix r = correlation(features);
  Matrix shifted = r;
  shifted.diagonal().array() += 1.0 / (aperture * aperture);
  // R and R + cI commute, so R (R + cI)^-1 == (R + cI)^-1 R.
  Conceptor c;
  c.S = symmetrized(solve_spd(shifted, r));
  c.aperture = aperture;
  c.source_count = features.rows();
  return c;
}

PcaProjector build_pca(const Matrix& features, Eigen::Index k) {
  check_features(features, "build_pca");
  const Eigen::Index d = features.cols();
  if (k < 1 || k > d) throw ArgumentError("build_pca: k must lie in [1, d]");

  const SymEig eig = sym_eig(correlation(features));
  const Matrix basis = eig.vectors.leftCols(k);

  PcaProjector p;
  p.P = symmetrized(basis * basis.transpose());
  p.k = k;
  const double total = eig.values.cwiseMax(0.0).sum();
  const double kept = eig.values.head(k).cwiseMax(0.0).sum();
  p.captured_energy_fraction = total > 0.0 ? kept / total : 1.0;
  return p;
}

Eigen::Index choose_pca_k(const Matrix& features, double energy) {
  check_features(features, "choose_pca_k");
  if (!(energy > 0.0 && energy <= 1.0)) throw ArgumentError("choose_pca_k: energy must lie in (0, 1]");
  const Vector values = sym_eig(correlation(features)).values.cwiseMax(0.0);
  const double total = values.sum();
  if (total <= 0.0) return features.cols();
  double kept = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    kept += values(k);
    if (kept / total >= energy) return k + 1;
  }
  return values.size();
}

double energy_ratio(const Vector& z, const Matrix& S) {
  if (z.size() != S.rows()) throw ArgumentError("energy_ratio: dimension mismatch");
  const double sq = z.squaredNorm();
  if (!(sq > 0.0)) throw DegenerateInputError("energy_ratio: zero feature vector");
  return z.dot(S * z) / sq;
}

EnergyStats labeled_energy_stats(const Matrix& labeled, const Matrix& S) {
  if (labeled.rows() < 1) throw ArgumentError("labeled_energy_stats: no labeled features");
  if (labeled.cols() != S.rows()) throw ArgumentError("labeled_energy_stats: dimension mismatch");
  EnergyStats stats;
  stats.per_sample.resize(labeled.rows());
  for (Eigen::Index i = 0; i < labeled.rows(); ++i)
    stats.per_sample(i) = energy_ratio(labeled.row(i).transpose(), S);
  stats.mean_labeled_energy = stats.per_sample.mean();
  return stats;
}

Matrix apply_soft(const Matrix& S, const Matrix& rows) {
  if (rows.cols() != S.rows()) throw ArgumentError("apply_soft: column count does not match subspace dimension");
  return rows * S;
}

}  // namespace eagc
