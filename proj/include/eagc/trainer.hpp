#pragma once

// Reference-model training, joint GCD training with the coordinator hooks,
// and Hungarian-matched evaluation on the unlabeled split.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eagc/coordinator.hpp"
#include "eagc/dataset.hpp"
#include "eagc/metrics.hpp"
#include "eagc/model.hpp"
#include "eagc/subspace.hpp"

namespace eagc {

enum class EagcMode {
  off,           // plain joint objective
  on,            // alignment hook + energy-adaptive projection
  loss_variant,  // proximal loss term instead of the alignment hook
  uniform_proj,  // alignment hook + projection with tau = 1 everywhere
};

std::string to_string(EagcMode mode);
EagcMode parse_eagc_mode(std::string_view text);

enum class SubspaceKind { conceptor, pca };

std::string to_string(SubspaceKind kind);
SubspaceKind parse_subspace_kind(std::string_view text);

struct RefConfig {
  int epochs = 30;
  int batch_size = 32;
  double lr = 0.02;
  double tau_s = 0.1;
  bool cosine_decay = true;
  int feature_dim = 16;
  std::uint64_t seed = 0;
};

struct RefResult {
  Model model;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double lr_encoder = 0.06;
  double lr_head = 0.08;
  bool cosine_decay = true;
  std::uint64_t seed = 0;
  double sharpen_temp = 0.05;
  double entropy_weight = 0.3;
  double view_noise_std = 0.1;
  CoordinatorConfig coord;
  EagcMode eagc = EagcMode::off;
  SubspaceKind subspace = SubspaceKind::conceptor;
  int pca_k = 0;               // 0 picks k by soc_energy (PCA subspace variant)
  double soc_energy = 0.90;    // energy fraction for the SOC projector
  int measure_every = 10;
  int dense_steps = 200;       // measure every step below this index

  bool eagc_enabled() const { return eagc != EagcMode::off; }
  void validate() const;
};

/// Fixed quantities computed once from the frozen reference model.
struct TrainContext {
  Model reference;
  Matrix subspace_op;     // Conceptor S, or P for the PCA variant
  EnergyStats energy;     // labeled energy under subspace_op
  PcaProjector soc_projector;  // reference known subspace; its rank is reused for SOC
};

TrainContext prepare_context(const DatasetSplit& data, const Model& reference, const TrainConfig& cfg);

struct TraceRow {
  long step = 0;
  double loss_sup = 0.0;
  double loss_unsup = 0.0;
  double gdc = 0.0;
  double soc = 0.0;
  double rho_grad = 0.0;
  double rho_in = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::vector<AccTriple> epoch_acc;
  AccTriple initial_acc;
  AccTriple final_acc;
  AccTriple best_acc;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

struct StepResult {
  LossParts losses;
  Matrix feature_grads_before;
  Matrix feature_grads_after;
  GradientAdjustment adjustment;
  Matrix encoder_grad;
  Matrix prototype_grad;
};

RefResult train_reference(const DatasetSplit& data, const RefConfig& cfg);

/// Gradients of one coordinated step at the current parameters, without
/// updating the model. `beta_override` replaces the unsupervised weight
/// (0 gives the supervised-only reference gradient).
StepResult compute_step(const Model& model, const Batch& batch, const TrainContext& ctx, const TrainConfig& cfg,
                        std::optional<double> beta_override = std::nullopt);

/// Plain SGD update; prototypes are renormalized afterwards.
void apply_update(Model& model, const StepResult& step, double lr_encoder, double lr_head);

/// compute_step followed by apply_update.
StepResult gcd_step(Model& model, const Batch& batch, const TrainContext& ctx, const TrainConfig& cfg,
                    double lr_encoder, double lr_head);

/// Initial GCD model: same encoder initialization stream as the reference
/// model, fresh prototypes for every class.
Model init_gcd_model(const DatasetSplit& data, const TrainConfig& cfg, int feature_dim);

double cosine_lr(double base, long step, long total_steps, bool enabled);

using StepObserver = std::function<void(long step, const Model&)>;

/// Runs the full schedule. A non-finite loss stops training and returns the
/// partial trace with `aborted` set.
TrainTrace train_gcd(const DatasetSplit& data, const Model& reference, const TrainConfig& cfg,
                     const StepObserver& observer = {});

AccTriple evaluate(const Model& model, const DatasetSplit& data);

/// Mean of each trace column over rows with step < window, skipping NaN.
TraceRow window_means(const TrainTrace& trace, long window);

/// Seed-stream tags.
inline constexpr std::uint64_t kStreamData = 1;
inline constexpr std::uint64_t kStreamEncoderInit = 2;
inline constexpr std::uint64_t kStreamRefHead = 3;
inline constexpr std::uint64_t kStreamRefShuffle = 4;
inline constexpr std::uint64_t kStreamGcdHead = 5;
inline constexpr std::uint64_t kStreamGcdShuffle = 6;
inline constexpr std::uint64_t kStreamViews = 7;

}  // namespace eagc
