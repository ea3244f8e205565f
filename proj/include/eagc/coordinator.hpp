#pragma once

// Energy-aware gradient coordination at the feature level.
//
// The coordinator edits the gradient of the training loss with respect to
// encoder outputs z before it is propagated into encoder parameters:
//   labeled rows:   g + lambda_a (z - z_ref)             (anchor alignment)
//   unlabeled rows: g - lambda_p tau_i (g S)             (elastic projection)
// where S is the known-class subspace operator and tau_i is a per-sample
// weight derived from the feature's energy inside S.

#include <string>
#include <string_view>
#include <vector>

#include "eagc/numerics.hpp"
#include "eagc/subspace.hpp"

namespace eagc {

enum class TauClamp { zero_one, zero_only, unclamped };

std::string to_string(TauClamp clamp);
TauClamp parse_tau_clamp(std::string_view text);

/// How per-sample projection weights are assigned to unlabeled rows.
enum class ProjectionWeighting {
  energy_adaptive,  // tau_i = 1 - E(z_i) / mean labeled energy, clamped
  uniform,          // tau_i = 1 for every unlabeled row
};

struct CoordinatorConfig {
  double lambda_a = 0.7;
  double lambda_p = 0.5;
  double eta = 2.0;
  TauClamp tau_clamp = TauClamp::zero_one;
  double alpha = 0.35;
  double beta = 0.65;
  double tau_s = 0.1;

  /// Throws ArgumentError when an invariant is violated.
  void validate() const;
};

struct BatchMask {
  std::vector<bool> labeled;

  std::size_t size() const { return labeled.size(); }
  std::size_t labeled_count() const;
};

struct GradientAdjustment {
  Matrix delta_align;  // zero on unlabeled rows
  Matrix delta_proj;   // zero on labeled rows
  Vector tau;          // projection weight per row, zero on labeled rows
};

struct CoordinatedGradients {
  Matrix adjusted;
  GradientAdjustment adjustment;
};

struct ProximalLoss {
  double loss = 0.0;
  Matrix grad;
};

Matrix alignment_term(const Matrix& features, const Matrix& ref_features, double lambda_a);

double clamp_tau(double raw, TauClamp clamp);

Vector adaptive_weights(const Matrix& unlabeled, const Matrix& S, double mean_labeled_energy, TauClamp clamp);
inline Vector adaptive_weights(const Matrix& unlabeled, const Conceptor& c, double mean_labeled_energy,
                               TauClamp clamp) {
  return adaptive_weights(unlabeled, c.S, mean_labeled_energy, clamp);
}

Matrix elastic_projection(const Matrix& unlabeled_grads, const Matrix& S, const Vector& tau, double lambda_p);
inline Matrix elastic_projection(const Matrix& unlabeled_grads, const Conceptor& c, const Vector& tau,
                                 double lambda_p) {
  return elastic_projection(unlabeled_grads, c.S, tau, lambda_p);
}

/// Applies both hooks to a full batch of feature gradients. Rows flagged
/// labeled receive the alignment delta, the rest receive the projection
/// delta. `S` is the known-subspace operator (a Conceptor's S, or a PCA
/// projector for the hard-subspace variant).
CoordinatedGradients coordinate(const Matrix& feature_grads, const Matrix& features, const Matrix& ref_features,
                                const BatchMask& mask, const Matrix& S, const EnergyStats& stats,
                                const CoordinatorConfig& cfg,
                                ProjectionWeighting weighting = ProjectionWeighting::energy_adaptive);
inline CoordinatedGradients coordinate(const Matrix& feature_grads, const Matrix& features,
                                       const Matrix& ref_features, const BatchMask& mask, const Conceptor& c,
                                       const EnergyStats& stats, const CoordinatorConfig& cfg,
                                       ProjectionWeighting weighting = ProjectionWeighting::energy_adaptive) {
  return coordinate(feature_grads, features, ref_features, mask, c.S, stats, cfg, weighting);
}

/// (lambda_a / 2) * sum of squared row distances to the anchor, with its
/// gradient. The gradient is computed by alignment_term, so the loss-based
/// variant and the hook variant produce bit-identical feature gradients.
ProximalLoss proximal_loss(const Matrix& features, const Matrix& ref_features, double lambda_a);

}  // namespace eagc
