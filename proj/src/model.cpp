#include "eagc/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"

namespace eagc {

void Model::normalize_prototypes() {
  for (Eigen::Index k = 0; k < prototypes.rows(); ++k) {
    const double n = prototypes.row(k).norm();
    if (n > 0.0) prototypes.row(k) /= n;
  }
}

Model init_model(Eigen::Index input_dim, Eigen::Index feature_dim, Eigen::Index num_classes, SeededRng& encoder_rng,
                 SeededRng& head_rng) {
  if (input_dim < 1 || feature_dim < 1 || num_classes < 1) throw ArgumentError("init_model: empty shape");
  Model m;
  m.encoder = gaussian(encoder_rng, 0.0, 1.0 / std::sqrt(static_cast<double>(input_dim)), input_dim, feature_dim);
  m.prototypes = gaussian(head_rng, 0.0, 1.0, num_classes, feature_dim);
  m.normalize_prototypes();
  return m;
}

void write_model(std::ostream& out, const Model& m) {
  write_matrix(out, m.encoder);
  write_matrix(out, m.prototypes);
}

Model read_model(std::istream& in) {
  Model m;
  m.encoder = read_matrix(in);
  m.prototypes = read_matrix(in);
  if (m.encoder.cols() != m.prototypes.cols()) throw DataError("model file: encoder and prototype widths differ");
  return m;
}

void save_model(const std::string& path, const Model& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_model(out, m);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  return read_model(in);
}

Batch make_two_view_batch(const DatasetSplit& data, const std::vector<std::size_t>& pool_indices,
                          double view_noise_std, SeededRng& rng) {
  const auto b = static_cast<Eigen::Index>(pool_indices.size());
  const auto nl = static_cast<std::size_t>(data.labeled_count());
  const Eigen::Index d = data.input_dim();

  Matrix base(b, d);
  std::vector<int> labels(static_cast<std::size_t>(b), -1);
  std::vector<bool> labeled(static_cast<std::size_t>(b), false);
  for (Eigen::Index i = 0; i < b; ++i) {
    const std::size_t idx = pool_indices[static_cast<std::size_t>(i)];
    if (idx < nl) {
      base.row(i) = data.labeled_x.row(static_cast<Eigen::Index>(idx));
      labels[static_cast<std::size_t>(i)] = data.labeled_y[idx];
      labeled[static_cast<std::size_t>(i)] = true;
    } else {
      base.row(i) = data.unlabeled_x.row(static_cast<Eigen::Index>(idx - nl));
    }
  }

  Batch batch;
  batch.x.resize(2 * b, d);
  batch.x.topRows(b) = base + gaussian(rng, 0.0, view_noise_std, b, d);
  batch.x.bottomRows(b) = base + gaussian(rng, 0.0, view_noise_std, b, d);
  batch.mask.labeled.resize(static_cast<std::size_t>(2 * b));
  batch.labels.resize(static_cast<std::size_t>(2 * b));
  batch.partner.resize(static_cast<std::size_t>(2 * b));
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto c = static_cast<std::size_t>(i + b);
    batch.mask.labeled[a] = batch.mask.labeled[c] = labeled[a];
    batch.labels[a] = batch.labels[c] = labels[a];
    batch.partner[a] = static_cast<int>(c);
    batch.partner[c] = static_cast<int>(a);
  }
  return batch;
}

Batch make_labeled_batch(const DatasetSplit& data, const std::vector<std::size_t>& labeled_indices) {
  const auto b = static_cast<Eigen::Index>(labeled_indices.size());
  Batch batch;
  batch.x.resize(b, data.input_dim());
  for (Eigen::Index i = 0; i < b; ++i) {
    const std::size_t idx = labeled_indices[static_cast<std::size_t>(i)];
    batch.x.row(i) = data.labeled_x.row(static_cast<Eigen::Index>(idx));
    batch.labels.push_back(data.labeled_y[idx]);
  }
  batch.mask.labeled.assign(static_cast<std::size_t>(b), true);
  batch.partner.assign(static_cast<std::size_t>(b), -1);
  return batch;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

namespace {

struct Forward {
  Matrix z;
  Vector norms;
  Matrix u;
  Matrix logits;
};

Forward forward(const Model& model, const Matrix& x, double tau_s) {
  Forward f;
  f.z = model.features(x);
  f.norms = f.z.rowwise().norm();
  if (!(f.norms.array() > 0.0).all()) throw NumericalError("forward: zero feature vector");
  f.u = f.norms.cwiseInverse().asDiagonal() * f.z;
  f.logits = (f.u * model.prototypes.transpose()) / tau_s;
  return f;
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double mx = row.maxCoeff();
  return mx + std::log((row.array() - mx).exp().sum());
}

}  // namespace

Matrix sharpened_targets(const Model& model, const Batch& batch, double temp) {
  if (!(temp > 0.0)) throw ArgumentError("sharpened_targets: temperature must be positive");
  const Forward f = forward(model, batch.x, 1.0);
  const Matrix sharp = softmax_rows(f.logits / temp);
  Matrix t = Matrix::Zero(batch.rows(), model.num_classes());
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    const int p = batch.partner[static_cast<std::size_t>(i)];
    if (!batch.mask.labeled[static_cast<std::size_t>(i)] && p >= 0) t.row(i) = sharp.row(p);
  }
  return t;
}

ObjectiveResult gcd_objective(const Model& model, const Batch& batch, const Matrix& targets,
                              const Matrix& ref_features, const ObjectiveWeights& w) {
  const Eigen::Index m = batch.rows();
  const Eigen::Index k = model.num_classes();
  if (batch.x.cols() != model.input_dim()) throw ArgumentError("gcd_objective: input width does not match encoder");
  if (targets.rows() != m || targets.cols() != k) throw ArgumentError("gcd_objective: targets shape mismatch");

  const Forward f = forward(model, batch.x, w.tau_s);
  const Matrix p = softmax_rows(f.logits);

  std::vector<Eigen::Index> lab, unl;
  for (Eigen::Index i = 0; i < m; ++i) (batch.mask.labeled[static_cast<std::size_t>(i)] ? lab : unl).push_back(i);

  ObjectiveResult out;
  Matrix dlogits = Matrix::Zero(m, k);

  if (!lab.empty()) {
    const double inv = 1.0 / static_cast<double>(lab.size());
    double loss = 0.0;
    for (Eigen::Index i : lab) {
      const int y = batch.labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= k) throw ArgumentError("gcd_objective: label outside classifier range");
      loss += log_sum_exp(f.logits.row(i)) - f.logits(i, y);
      dlogits.row(i) = w.alpha * inv * p.row(i);
      dlogits(i, y) -= w.alpha * inv;
    }
    out.losses.sup = loss * inv;
  }

  if (!unl.empty() && w.beta != 0.0) {
    const double inv = 1.0 / static_cast<double>(unl.size());
    double distill = 0.0;
    Eigen::RowVectorXd mean_p = Eigen::RowVectorXd::Zero(k);
    for (Eigen::Index i : unl) {
      const double lse = log_sum_exp(f.logits.row(i));
      for (Eigen::Index c = 0; c < k; ++c) distill -= targets(i, c) * (f.logits(i, c) - lse);
      mean_p += p.row(i);
    }
    distill *= inv;
    mean_p *= inv;
    const Eigen::RowVectorXd log_mean = mean_p.array().max(std::numeric_limits<double>::min()).log();
    const double entropy = -(mean_p.array() * log_mean.array()).sum();
    out.losses.unsup = distill - w.entropy_weight * entropy;

    for (Eigen::Index i : unl) {
      // Distillation: (p_i - t_i) scaled by sum(t_i), which is 1 for real targets.
      const double tsum = targets.row(i).sum();
      Eigen::RowVectorXd g = (p.row(i) * tsum - targets.row(i)) * inv;
      // Negative entropy of the mean prediction.
      const double avg_log = p.row(i).dot(log_mean);
      g += w.entropy_weight * inv * (p.row(i).array() * (log_mean.array() - avg_log)).matrix();
      dlogits.row(i) += w.beta * g;
    }
  }

  const Matrix dU = (dlogits * model.prototypes) / w.tau_s;
  out.prototype_grads = (dlogits.transpose() * f.u) / w.tau_s;

  Matrix dz(m, model.feature_dim());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double radial = dU.row(i).dot(f.u.row(i));
    dz.row(i) = (dU.row(i) - radial * f.u.row(i)) / f.norms(i);
  }

  if (w.prox_lambda > 0.0 && !lab.empty()) {
    if (ref_features.rows() != m || ref_features.cols() != model.feature_dim())
      throw ArgumentError("gcd_objective: reference features shape mismatch");
    const ProximalLoss prox = proximal_loss(f.z(lab, Eigen::all), ref_features(lab, Eigen::all), w.prox_lambda);
    out.losses.prox = prox.loss;
    Matrix full = Matrix::Zero(m, model.feature_dim());
    full(lab, Eigen::all) = prox.grad;
    dz = dz + full;
  }

  out.losses.total = w.alpha * out.losses.sup + w.beta * out.losses.unsup + out.losses.prox;
  if (!std::isfinite(out.losses.total)) throw NumericalError("gcd_objective: non-finite loss");
  out.features = f.z;
  out.feature_grads = std::move(dz);
  return out;
}

double supervised_loss(const Model& model, const DatasetSplit& data, double tau_s) {
  if (data.labeled_count() == 0) throw DataError("supervised_loss: no labeled samples");
  const Forward f = forward(model, data.labeled_x, tau_s);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < f.logits.rows(); ++i)
    loss += log_sum_exp(f.logits.row(i)) - f.logits(i, data.labeled_y[static_cast<std::size_t>(i)]);
  return loss / static_cast<double>(f.logits.rows());
}

std::vector<int> predict(const Model& model, const Matrix& x) {
  const Matrix scores = model.features(x) * model.prototypes.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace eagc
