#pragma once

// Known-class representation subspaces built from reference-model features:
// the soft Conceptor operator and the hard PCA projector, plus the feature
// energy ratio used by the elastic projection.

#include "eagc/numerics.hpp"

namespace eagc {

/// Soft subspace operator S = R (R + eta^-2 I)^-1 with R = Z^T Z / N.
/// Shares eigenvectors with R; each eigenvalue sigma of R maps to
/// sigma / (sigma + eta^-2), so the spectrum of S lies in [0, 1).
struct Conceptor {
  Matrix S;
  double aperture = 2.0;
  Eigen::Index source_count = 0;

  Eigen::Index dim() const { return S.rows(); }
};

/// Hard projector P = U_k U_k^T onto the top-k principal directions of
/// Z^T Z / N (uncentered).
struct PcaProjector {
  Matrix P;
  Eigen::Index k = 0;
  double captured_energy_fraction = 0.0;

  Eigen::Index dim() const { return P.rows(); }
};

struct EnergyStats {
  double mean_labeled_energy = 0.0;
  Vector per_sample;
};

/// Uncentered second-moment matrix Z^T Z / N.
Matrix correlation(const Matrix& features);

Conceptor build_conceptor(const Matrix& features, double aperture);

PcaProjector build_pca(const Matrix& features, Eigen::Index k);

/// Smallest k whose captured energy fraction reaches `energy`.
Eigen::Index choose_pca_k(const Matrix& features, double energy = 0.90);

/// z^T S z / |z|^2 for a symmetric operator S. Throws DegenerateInputError on
/// a zero vector.
double energy_ratio(const Vector& z, const Matrix& S);
inline double energy_ratio(const Vector& z, const Conceptor& c) { return energy_ratio(z, c.S); }

EnergyStats labeled_energy_stats(const Matrix& labeled, const Matrix& S);
inline EnergyStats labeled_energy_stats(const Matrix& labeled, const Conceptor& c) {
  return labeled_energy_stats(labeled, c.S);
}

/// Row-wise soft projection G S.
Matrix apply_soft(const Matrix& S, const Matrix& rows);
inline Matrix apply_soft(const Conceptor& c, const Matrix& rows) { return apply_soft(c.S, rows); }

}  // namespace eagc
