#pragma once

// Linear encoder + cosine prototype classifier and the joint GCD objective
// with hand-derived gradients.
//
// Forward pass for a batch X (rows are samples):
//   Z = X W                     features
//   u_i = z_i / |z_i|           normalized features
//   logits = U C^T / tau_s      C rows are unit prototypes
//
// Objective: alpha * L_sup + beta * L_unsup (+ lambda/2 |Z_l - Zref_l|^2 for
// the loss-based proximal variant), where
//   L_sup   = mean cross-entropy over labeled rows
//   L_unsup = mean cross-entropy of every unlabeled view against the fixed
//             sharpened prediction of its partner view
//             - entropy_weight * H(mean prediction over unlabeled rows)

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eagc/coordinator.hpp"
#include "eagc/dataset.hpp"
#include "eagc/numerics.hpp"

namespace eagc {

struct Model {
  Matrix encoder;     // d_in x d
  Matrix prototypes;  // K x d, unit rows

  Eigen::Index input_dim() const { return encoder.rows(); }
  Eigen::Index feature_dim() const { return encoder.cols(); }
  Eigen::Index num_classes() const { return prototypes.rows(); }

  Matrix features(const Matrix& x) const { return x * encoder; }
  void normalize_prototypes();
  bool finite() const { return encoder.allFinite() && prototypes.allFinite(); }
};

/// Encoder entries ~ N(0, 1/d_in) drawn from `encoder_rng`; prototypes are
/// normalized Gaussian rows drawn from `head_rng`.
Model init_model(Eigen::Index input_dim, Eigen::Index feature_dim, Eigen::Index num_classes, SeededRng& encoder_rng,
                 SeededRng& head_rng);

/// Model file: the encoder matrix block followed by the prototype block.
void write_model(std::ostream& out, const Model& m);
Model read_model(std::istream& in);
void save_model(const std::string& path, const Model& m);
Model load_model(const std::string& path);

/// One training batch. Rows are augmented views; `partner[i]` is the row of
/// the other view of the same sample, or -1 when a sample has one view.
struct Batch {
  Matrix x;
  BatchMask mask;
  std::vector<int> labels;   // class id for labeled rows, -1 otherwise
  std::vector<int> partner;

  Eigen::Index rows() const { return x.rows(); }
};

/// Builds a two-view batch: the first half of the rows hold view A of each
/// selected sample, the second half view B. Pool index i < labeled_count
/// refers to a labeled sample, larger indices to unlabeled samples.
Batch make_two_view_batch(const DatasetSplit& data, const std::vector<std::size_t>& pool_indices, double view_noise_std,
                          SeededRng& rng);

/// Single clean view of every labeled sample.
Batch make_labeled_batch(const DatasetSplit& data, const std::vector<std::size_t>& labeled_indices);

struct ObjectiveWeights {
  double alpha = 0.35;
  double beta = 0.65;
  double tau_s = 0.1;
  double entropy_weight = 0.3;
  double prox_lambda = 0.0;  // > 0 only for the loss-based proximal variant
};

struct LossParts {
  double sup = 0.0;
  double unsup = 0.0;
  double prox = 0.0;
  double total = 0.0;
};

struct ObjectiveResult {
  LossParts losses;
  Matrix features;        // Z
  Matrix feature_grads;   // dL/dZ
  Matrix prototype_grads; // dL/dC
};

/// Row-wise softmax, shifted by the row maximum.
Matrix softmax_rows(const Matrix& logits);

/// Sharpened targets for unlabeled rows: softmax(u_partner C^T / temp). Rows
/// that are labeled or without a partner are zero.
Matrix sharpened_targets(const Model& model, const Batch& batch, double temp);

/// Evaluates the objective with `targets` held fixed. `ref_features` is only
/// read when prox_lambda > 0.
ObjectiveResult gcd_objective(const Model& model, const Batch& batch, const Matrix& targets,
                              const Matrix& ref_features, const ObjectiveWeights& w);

/// dL/dW for a linear encoder: X^T G.
inline Matrix encoder_grad(const Batch& batch, const Matrix& feature_grads) {
  return batch.x.transpose() * feature_grads;
}

/// Mean cross-entropy of the labeled set under its clean features.
double supervised_loss(const Model& model, const DatasetSplit& data, double tau_s);

/// Argmax prototype per row.
std::vector<int> predict(const Model& model, const Matrix& x);

}  // namespace eagc
