#pragma once

// Gradient-entanglement diagnostics and Hungarian-matched clustering accuracy.

#include <span>
#include <vector>

#include "eagc/numerics.hpp"
#include "eagc/subspace.hpp"

namespace eagc {

struct GeReport {
  double gdc = 0.0;
  double soc = 0.0;
  double rho_grad = 0.0;
  double rho_in = 0.0;
  long step = 0;
};

struct AccTriple {
  double all = 0.0;
  double old = 0.0;  // unlabeled samples of known classes
  double new_ = 0.0;  // unlabeled samples of novel classes
};

/// Gradient deviation coefficient: 1 - cos(reference, joint), in [0, 2].
double gdc(const Vector& reference_grad, const Vector& joint_grad);

/// Fraction of the Frobenius energy of `features` kept by the projector P.
double soc(const Matrix& features, const Matrix& P);
inline double soc(const Matrix& features, const PcaProjector& p) { return soc(features, p.P); }

/// Same quantity as soc, applied to current-encoder novel features.
inline double rho_in(const Matrix& features, const PcaProjector& p) { return soc(features, p.P); }

/// Share of the summed per-class gradient norms that belongs to known classes.
double rho_grad(const Vector& per_class_norms, const std::vector<bool>& known);

/// Clustering accuracy under one optimal cluster-to-class matching computed
/// over all samples. `known_classes` lists the ground-truth ids treated as
/// known; `old` and `new_` are read off the same matching. A partition with
/// no samples reports 0.
AccTriple hungarian_acc(std::span<const int> pred, std::span<const int> gt, std::span<const int> known_classes);

}  // namespace eagc
