#include "eagc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eagc/errors.hpp"

namespace eagc {

std::string to_string(EagcMode mode) {
  switch (mode) {
    case EagcMode::off: return "off";
    case EagcMode::on: return "on";
    case EagcMode::loss_variant: return "loss-variant";
    case EagcMode::uniform_proj: return "uniform-proj";
  }
  return "unknown";
}

EagcMode parse_eagc_mode(std::string_view text) {
  if (text == "off") return EagcMode::off;
  if (text == "on") return EagcMode::on;
  if (text == "loss-variant") return EagcMode::loss_variant;
  if (text == "uniform-proj") return EagcMode::uniform_proj;
  throw ArgumentError("unknown eagc mode '" + std::string(text) + "' (expected on|off|loss-variant|uniform-proj)");
}

std::string to_string(SubspaceKind kind) { return kind == SubspaceKind::pca ? "pca" : "conceptor"; }

SubspaceKind parse_subspace_kind(std::string_view text) {
  if (text == "conceptor") return SubspaceKind::conceptor;
  if (text == "pca") return SubspaceKind::pca;
  throw ArgumentError("unknown subspace kind '" + std::string(text) + "' (expected conceptor|pca)");
}

void TrainConfig::validate() const {
  coord.validate();
  if (epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(lr_encoder >= 0.0) || !(lr_head >= 0.0)) throw ArgumentError("learning rates must be >= 0");
  if (!(sharpen_temp > 0.0)) throw ArgumentError("sharpen_temp must be > 0");
  if (!(entropy_weight >= 0.0)) throw ArgumentError("entropy_weight must be >= 0");
  if (!(view_noise_std >= 0.0)) throw ArgumentError("view_noise_std must be >= 0");
  if (pca_k < 0) throw ArgumentError("pca_k must be >= 0");
  if (!(soc_energy > 0.0 && soc_energy <= 1.0)) throw ArgumentError("soc_energy must lie in (0, 1]");
  if (measure_every < 1) throw ArgumentError("measure_every must be >= 1");
  if (dense_steps < 0) throw ArgumentError("dense_steps must be >= 0");
}

double cosine_lr(double base, long step, long total_steps, bool enabled) {
  if (!enabled || total_steps <= 0) return base;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainContext prepare_context(const DatasetSplit& data, const Model& reference, const TrainConfig& cfg) {
  if (data.labeled_count() == 0) throw DataError("prepare_context: no labeled samples");
  TrainContext ctx;
  ctx.reference = reference;
  const Matrix z_old = reference.features(data.labeled_x);
  if (cfg.subspace == SubspaceKind::conceptor) {
    ctx.subspace_op = build_conceptor(z_old, cfg.coord.eta).S;
  } else {
    const Eigen::Index k = cfg.pca_k > 0 ? cfg.pca_k : choose_pca_k(z_old, cfg.soc_energy);
    ctx.subspace_op = build_pca(z_old, k).P;
  }
  ctx.energy = labeled_energy_stats(z_old, ctx.subspace_op);
  ctx.soc_projector = build_pca(z_old, choose_pca_k(z_old, cfg.soc_energy));
  return ctx;
}

RefResult train_reference(const DatasetSplit& data, const RefConfig& cfg) {
  if (data.labeled_count() == 0) throw DataError("train_reference: no labeled samples");
  std::vector<int> per_class(static_cast<std::size_t>(data.num_known), 0);
  for (int y : data.labeled_y) ++per_class[static_cast<std::size_t>(y)];
  for (int k = 0; k < data.num_known; ++k)
    if (per_class[static_cast<std::size_t>(k)] == 0)
      throw DataError("train_reference: known class " + std::to_string(k) + " has no labeled samples");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr >= 0.0) || !(cfg.tau_s > 0.0) || cfg.feature_dim < 1)
    throw ArgumentError("train_reference: invalid configuration");

  SeededRng enc_rng(derive_seed(cfg.seed, kStreamEncoderInit));
  SeededRng head_rng(derive_seed(cfg.seed, kStreamRefHead));
  SeededRng shuffle_rng(derive_seed(cfg.seed, kStreamRefShuffle));
  RefResult out;
  out.model = init_model(data.input_dim(), cfg.feature_dim, data.num_known, enc_rng, head_rng);

  ObjectiveWeights w;
  w.alpha = 1.0;
  w.beta = 0.0;
  w.tau_s = cfg.tau_s;
  const auto n = static_cast<std::size_t>(data.labeled_count());
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((n + b - 1) / b);
  const long total = steps_per_epoch * cfg.epochs;
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = permutation(shuffle_rng, n);
    for (std::size_t start = 0; start < n; start += b, ++step) {
      const std::vector<std::size_t> idx(perm.begin() + static_cast<long>(start),
                                         perm.begin() + static_cast<long>(std::min(n, start + b)));
      const Batch batch = make_labeled_batch(data, idx);
      const Matrix targets = Matrix::Zero(batch.rows(), out.model.num_classes());
      const ObjectiveResult obj = gcd_objective(out.model, batch, targets, Matrix(), w);
      StepResult sr;
      sr.encoder_grad = encoder_grad(batch, obj.feature_grads);
      sr.prototype_grad = obj.prototype_grads;
      const double lr = cosine_lr(cfg.lr, step, total, cfg.cosine_decay);
      apply_update(out.model, sr, lr, lr);
    }
  }

  out.final_loss = supervised_loss(out.model, data, cfg.tau_s);
  const std::vector<int> pred = predict(out.model, data.labeled_x);
  long hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labeled_y[i] ? 1 : 0;
  out.train_accuracy = static_cast<double>(hits) / static_cast<double>(pred.size());
  return out;
}

StepResult compute_step(const Model& model, const Batch& batch, const TrainContext& ctx, const TrainConfig& cfg,
                        std::optional<double> beta_override) {
  ObjectiveWeights w;
  w.alpha = cfg.coord.alpha;
  w.beta = beta_override.value_or(cfg.coord.beta);
  w.tau_s = cfg.coord.tau_s;
  w.entropy_weight = cfg.entropy_weight;
  w.prox_lambda = cfg.eagc == EagcMode::loss_variant ? cfg.coord.lambda_a : 0.0;

  const Matrix targets = w.beta != 0.0 ? sharpened_targets(model, batch, cfg.sharpen_temp)
                                       : Matrix::Zero(batch.rows(), model.num_classes());
  const Matrix ref_features = cfg.eagc_enabled() ? ctx.reference.features(batch.x) : Matrix();
  ObjectiveResult obj = gcd_objective(model, batch, targets, ref_features, w);

  StepResult out;
  out.losses = obj.losses;
  out.feature_grads_before = obj.feature_grads;
  if (cfg.eagc_enabled()) {
    CoordinatorConfig coord = cfg.coord;
    if (cfg.eagc == EagcMode::loss_variant) coord.lambda_a = 0.0;
    const auto weighting =
        cfg.eagc == EagcMode::uniform_proj ? ProjectionWeighting::uniform : ProjectionWeighting::energy_adaptive;
    CoordinatedGradients cg = coordinate(obj.feature_grads, obj.features, ref_features, batch.mask, ctx.subspace_op,
                                         ctx.energy, coord, weighting);
    out.feature_grads_after = std::move(cg.adjusted);
    out.adjustment = std::move(cg.adjustment);
  } else {
    const Eigen::Index m = obj.feature_grads.rows(), d = obj.feature_grads.cols();
    out.feature_grads_after = obj.feature_grads;
    out.adjustment.delta_align = Matrix::Zero(m, d);
    out.adjustment.delta_proj = Matrix::Zero(m, d);
    out.adjustment.tau = Vector::Zero(m);
  }
  out.encoder_grad = encoder_grad(batch, out.feature_grads_after);
  out.prototype_grad = std::move(obj.prototype_grads);
  return out;
}

void apply_update(Model& model, const StepResult& step, double lr_encoder, double lr_head) {
  model.encoder -= lr_encoder * step.encoder_grad;
  if (lr_head != 0.0) {
    model.prototypes -= lr_head * step.prototype_grad;
    model.normalize_prototypes();
  }
}

StepResult gcd_step(Model& model, const Batch& batch, const TrainContext& ctx, const TrainConfig& cfg,
                    double lr_encoder, double lr_head) {
  StepResult step = compute_step(model, batch, ctx, cfg);
  apply_update(model, step, lr_encoder, lr_head);
  return step;
}

Model init_gcd_model(const DatasetSplit& data, const TrainConfig& cfg, int feature_dim) {
  SeededRng enc_rng(derive_seed(cfg.seed, kStreamEncoderInit));
  SeededRng head_rng(derive_seed(cfg.seed, kStreamGcdHead));
  return init_model(data.input_dim(), feature_dim, data.num_total, enc_rng, head_rng);
}

AccTriple evaluate(const Model& model, const DatasetSplit& data) {
  if (data.unlabeled_count() == 0) throw DataError("evaluate: no unlabeled samples");
  const std::vector<int> pred = predict(model, data.unlabeled_x);
  const std::vector<int> known = data.known_class_ids();
  return hungarian_acc(pred, data.unlabeled_y, known);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector flatten(const Matrix& a, const Matrix& b) {
  Vector v(a.size() + b.size());
  v.head(a.size()) = Eigen::Map<const Vector>(a.data(), a.size());
  v.tail(b.size()) = Eigen::Map<const Vector>(b.data(), b.size());
  return v;
}

TraceRow measure(const Model& model, const Batch& batch, const StepResult& step, const TrainContext& ctx,
                 const TrainConfig& cfg, const DatasetSplit& data, const Matrix& novel_x, long index) {
  TraceRow row;
  row.step = index;
  row.loss_sup = step.losses.sup;
  row.loss_unsup = step.losses.unsup;

  const StepResult sup_only = compute_step(model, batch, ctx, cfg, 0.0);
  const Vector g = flatten(step.encoder_grad, step.prototype_grad);
  const Vector g_ref = flatten(sup_only.encoder_grad, sup_only.prototype_grad);
  row.gdc = (g.norm() > 0.0 && g_ref.norm() > 0.0) ? gdc(g_ref, g) : kNaN;

  const Vector class_norms = step.prototype_grad.rowwise().norm();
  std::vector<bool> known(static_cast<std::size_t>(class_norms.size()));
  for (std::size_t k = 0; k < known.size(); ++k) known[k] = static_cast<int>(k) < data.num_known;
  row.rho_grad = class_norms.sum() > 0.0 ? rho_grad(class_norms, known) : kNaN;

  if (novel_x.rows() > 0) {
    const Matrix z_new = model.features(novel_x);
    const Matrix z_old = model.features(data.labeled_x);
    if (!z_new.allFinite() || !z_old.allFinite()) throw NumericalError("train_gcd: non-finite features");
    // Known subspace of the model being measured; k stays fixed at the
    // reference choice so paired runs use the same rank.
    row.soc = soc(z_new, build_pca(z_old, ctx.soc_projector.k));
    row.rho_in = rho_in(z_new, ctx.soc_projector);
  } else {
    row.soc = kNaN;
    row.rho_in = kNaN;
  }
  return row;
}

}  // namespace

TrainTrace train_gcd(const DatasetSplit& data, const Model& reference, const TrainConfig& cfg,
                     const StepObserver& observer) {
  cfg.validate();
  if (reference.input_dim() != data.input_dim())
    throw ArgumentError("train_gcd: reference model input width does not match the dataset");
  const TrainContext ctx = prepare_context(data, reference, cfg);
  Model model = init_gcd_model(data, cfg, static_cast<int>(reference.feature_dim()));
  SeededRng shuffle_rng(derive_seed(cfg.seed, kStreamGcdShuffle));
  SeededRng view_rng(derive_seed(cfg.seed, kStreamViews));
  const Matrix novel_x = data.novel_x();

  const auto pool = static_cast<std::size_t>(data.labeled_count() + data.unlabeled_count());
  const auto b = std::min(pool, static_cast<std::size_t>(cfg.batch_size));
  const long steps_per_epoch = static_cast<long>(pool / b);
  const long total = steps_per_epoch * cfg.epochs;

  TrainTrace trace;
  trace.initial_acc = evaluate(model, data);
  trace.final_acc = trace.initial_acc;
  trace.best_acc = trace.initial_acc;

  long step = 0;
  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      const auto perm = permutation(shuffle_rng, pool);
      for (long s = 0; s < steps_per_epoch; ++s, ++step) {
        const std::vector<std::size_t> idx(perm.begin() + s * static_cast<long>(b),
                                           perm.begin() + (s + 1) * static_cast<long>(b));
        const Batch batch = make_two_view_batch(data, idx, cfg.view_noise_std, view_rng);
        const StepResult result = compute_step(model, batch, ctx, cfg);
        if (step < cfg.dense_steps || step % cfg.measure_every == 0)
          trace.rows.push_back(measure(model, batch, result, ctx, cfg, data, novel_x, step));
        apply_update(model, result, cosine_lr(cfg.lr_encoder, step, total, cfg.cosine_decay),
                     cosine_lr(cfg.lr_head, step, total, cfg.cosine_decay));
        if (!model.finite()) throw NumericalError("train_gcd: non-finite parameters after update");
        if (observer) observer(step, model);
      }
      const AccTriple acc = evaluate(model, data);
      trace.epoch_acc.push_back(acc);
      trace.final_acc = acc;
      if (acc.all > trace.best_acc.all) trace.best_acc = acc;
    }
  } catch (const NumericalError& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  }
  trace.steps = step;
  return trace;
}

TraceRow window_means(const TrainTrace& trace, long window) {
  double sums[6] = {0, 0, 0, 0, 0, 0};
  long counts[6] = {0, 0, 0, 0, 0, 0};
  for (const TraceRow& r : trace.rows) {
    if (r.step >= window) continue;
    const double vals[6] = {r.loss_sup, r.loss_unsup, r.gdc, r.soc, r.rho_grad, r.rho_in};
    for (int c = 0; c < 6; ++c)
      if (!std::isnan(vals[c])) {
        sums[c] += vals[c];
        ++counts[c];
      }
  }
  auto mean = [&](int c) { return counts[c] ? sums[c] / static_cast<double>(counts[c]) : kNaN; };
  TraceRow out;
  out.step = window;
  out.loss_sup = mean(0);
  out.loss_unsup = mean(1);
  out.gdc = mean(2);
  out.soc = mean(3);
  out.rho_grad = mean(4);
  out.rho_in = mean(5);
  return out;
}

}  // namespace eagc
