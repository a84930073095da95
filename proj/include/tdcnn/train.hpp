#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tdcnn/dataset.hpp"
#include "tdcnn/folds.hpp"
#include "tdcnn/loss.hpp"
#include "tdcnn/metrics.hpp"
#include "tdcnn/model.hpp"

namespace tdcnn {

enum class Precision { F32, F64 };

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  double lr = 0.001;
  double gamma = 2.0;
  std::vector<double> class_weights;  // empty = all 1
  std::uint64_t seed = 42;
  Precision precision = Precision::F32;
  std::size_t patience = 0;   // epochs without validation improvement; 0 disables early stopping
  double val_fraction = 0.1;  // share of the training side held out by fit()
  bool augment = false;       // 5× rotations/flip on the training side only

  void validate() const;
  FocalLossConfig loss_config() const { return {gamma, class_weights}; }
  AdamConfig adam_config() const { return {lr, 0.9, 0.999, 1e-8}; }
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  bool has_validation = false;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
  /// Largest |Σ row − 1| over every probability row produced this epoch.
  double max_row_sum_error = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Row-sum tolerance for probability rows at precision T.
template <typename T>
constexpr double prob_row_tolerance() {
  return sizeof(T) == 4 ? 1e-5 : 1e-12;
}

/// Per epoch: reshuffle, minibatches (final partial batch kept), forward,
/// focal loss, backward, Adam. `val` may be null or empty. Throws
/// NumericError naming the epoch and batch if the loss or any probability
/// row goes bad.
template <typename T>
std::vector<EpochLog> train_model(Model<T>& model, const LabeledSet& train, const LabeledSet* val,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Augments the training side if configured, holds out cfg.val_fraction for
/// validation curves, then train_model.
template <typename T>
std::vector<EpochLog> fit(Model<T>& model, const LabeledSet& train, const TrainConfig& cfg,
                          const EpochCallback& on_epoch = {});

template <typename T>
struct Evaluation {
  ConfusionMatrix cm;
  std::vector<int> predictions;
  Tensor<T> probs;  // N × num_classes
  double loss = 0.0;
  double accuracy = 0.0;
  double max_row_sum_error = 0.0;
};

/// Batched inference over the whole set; prediction = argmax of the
/// probabilities. `loss` uses `loss_cfg`.
template <typename T>
Evaluation<T> score(const Model<T>& model, const LabeledSet& set, const FocalLossConfig& loss_cfg = {},
                    std::size_t batch_size = 16);

/// Confusion counts with tumor as the positive class.
template <typename T>
ConfusionMatrix evaluate(const Model<T>& model, const LabeledSet& set);

template <typename T>
struct CrossValHooks {
  std::function<void(Model<T>&, std::size_t fold)> on_model_built;
  std::function<void(std::size_t fold, const EpochLog&)> on_epoch;
};

struct CrossValResult {
  std::vector<MetricsReport> folds;
  MetricsSummary summary;
  std::vector<std::uint32_t> times_validated;  // per sample
  std::vector<std::vector<EpochLog>> logs;     // per fold
};

/// Fresh model per fold seeded with (cfg.seed ⊕ fold), trained with fit()
/// on the other folds and evaluated on fold i.
template <typename T>
CrossValResult cross_validate(const ModelSpec& spec, const LabeledSet& data, const TrainConfig& cfg,
                              const FoldPlan& plan, const CrossValHooks<T>& hooks = {});

struct ArchResult {
  HiddenArch arch;
  MetricsReport report;
  std::vector<EpochLog> logs;
};

/// Trains every hidden topology under the same config and seed and scores
/// each on `test`.
template <typename T>
std::vector<ArchResult> compare_archs(const LabeledSet& train, const LabeledSet& test, std::size_t height,
                                      std::size_t width, const TrainConfig& cfg,
                                      const std::function<void(HiddenArch, const EpochLog&)>& on_epoch = {});

}  // namespace tdcnn
