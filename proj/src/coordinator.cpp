#include "eagc/coordinator.hpp"

#include <algorithm>
#include <cmath>

#include "eagc/errors.hpp"

namespace eagc {

std::string to_string(TauClamp clamp) {
  switch (clamp) {
    case TauClamp::zero_one: return "clamp_zero_one";
    case TauClamp::zero_only: return "clamp_zero_only";
    case TauClamp::unclamped: return "unclamped";
  }
  return "unknown";
}

TauClamp parse_tau_clamp(std::string_view text) {
  if (text == "clamp_zero_one") return TauClamp::zero_one;
  if (text == "clamp_zero_only") return TauClamp::zero_only;
  if (text == "unclamped") return TauClamp::unclamped;
  throw ArgumentError("unknown tau clamp policy '" + std::string(text) + "'");
}

void CoordinatorConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(lambda_a)) throw ArgumentError("lambda_a must be finite and >= 0");
  if (!finite_nonneg(lambda_p)) throw ArgumentError("lambda_p must be finite and >= 0");
  if (!(std::isfinite(eta) && eta > 0.0)) throw ArgumentError("eta must be finite and > 0");
  if (!finite_nonneg(alpha) || !finite_nonneg(beta)) throw ArgumentError("alpha and beta must be finite and >= 0");
  if (!(alpha + beta > 0.0)) throw ArgumentError("alpha + beta must be positive");
  if (!(std::isfinite(tau_s) && tau_s > 0.0)) throw ArgumentError("tau_s must be finite and > 0");
}

std::size_t BatchMask::labeled_count() const {
  return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), true));
}

Matrix alignment_term(const Matrix& features, const Matrix& ref_features, double lambda_a) {
  if (features.rows() != ref_features.rows() || features.cols() != ref_features.cols())
    throw ArgumentError("alignment_term: feature and anchor shapes differ");
  return lambda_a * (features - ref_features);
}

double clamp_tau(double raw, TauClamp clamp) {
  switch (clamp) {
    case TauClamp::zero_one: return std::clamp(raw, 0.0, 1.0);
    case TauClamp::zero_only: return std::max(raw, 0.0);
    case TauClamp::unclamped: return raw;
  }
  return raw;
}

Vector adaptive_weights(const Matrix& unlabeled, const Matrix& S, double mean_labeled_energy, TauClamp clamp) {
  if (!(mean_labeled_energy > 0.0)) throw ArgumentError("adaptive_weights: mean labeled energy must be positive");
  Vector tau(unlabeled.rows());
  for (Eigen::Index i = 0; i < unlabeled.rows(); ++i) {
    const double e = energy_ratio(unlabeled.row(i).transpose(), S);
    tau(i) = clamp_tau(1.0 - e / mean_labeled_energy, clamp);
  }
  return tau;
}

Matrix elastic_projection(const Matrix& unlabeled_grads, const Matrix& S, const Vector& tau, double lambda_p) {
  if (tau.size() != unlabeled_grads.rows()) throw ArgumentError("elastic_projection: tau length != row count");
  return -lambda_p * (tau.asDiagonal() * apply_soft(S, unlabeled_grads));
}

CoordinatedGradients coordinate(const Matrix& feature_grads, const Matrix& features, const Matrix& ref_features,
                                const BatchMask& mask, const Matrix& S, const EnergyStats& stats,
                                const CoordinatorConfig& cfg, ProjectionWeighting weighting) {
  const Eigen::Index n = feature_grads.rows();
  const Eigen::Index d = feature_grads.cols();
  if (features.rows() != n || ref_features.rows() != n || static_cast<Eigen::Index>(mask.size()) != n)
    throw ArgumentError("coordinate: inconsistent row counts");
  if (features.cols() != d || ref_features.cols() != d || S.rows() != d || S.cols() != d)
    throw ArgumentError("coordinate: inconsistent feature dimension");

  CoordinatedGradients out;
  GradientAdjustment& adj = out.adjustment;
  adj.delta_align = Matrix::Zero(n, d);
  adj.delta_proj = Matrix::Zero(n, d);
  adj.tau = Vector::Zero(n);

  std::vector<Eigen::Index> labeled_rows;
  std::vector<Eigen::Index> unlabeled_rows;
  for (Eigen::Index i = 0; i < n; ++i) (mask.labeled[static_cast<std::size_t>(i)] ? labeled_rows : unlabeled_rows).push_back(i);

  if (!labeled_rows.empty()) {
    const Matrix align = alignment_term(features(labeled_rows, Eigen::all), ref_features(labeled_rows, Eigen::all),
                                        cfg.lambda_a);
    adj.delta_align(labeled_rows, Eigen::all) = align;
  }

  if (!unlabeled_rows.empty()) {
    const Matrix grads_u = feature_grads(unlabeled_rows, Eigen::all);
    Vector tau;
    if (weighting == ProjectionWeighting::uniform) {
      tau = Vector::Ones(static_cast<Eigen::Index>(unlabeled_rows.size()));
    } else {
      tau = adaptive_weights(features(unlabeled_rows, Eigen::all), S, stats.mean_labeled_energy, cfg.tau_clamp);
    }
    adj.delta_proj(unlabeled_rows, Eigen::all) = elastic_projection(grads_u, S, tau, cfg.lambda_p);
    adj.tau(unlabeled_rows) = tau;
  }

  out.adjusted = feature_grads + adj.delta_align + adj.delta_proj;
  return out;
}

ProximalLoss proximal_loss(const Matrix& features, const Matrix& ref_features, double lambda_a) {
  ProximalLoss out;
  out.grad = alignment_term(features, ref_features, lambda_a);
  out.loss = 0.5 * lambda_a * (features - ref_features).squaredNorm();
  return out;
}

}  // namespace eagc
