#include "tdcnn/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "tdcnn/rng.hpp"

namespace tdcnn {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be a finite value >= 0");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw InvalidArgument("validation fraction must be in [0, 1)");
  loss_config().validate(2);
}

namespace {

// Largest row-sum deviation; throws if any entry is NaN/Inf or outside [0, 1].
template <typename T>
double check_prob_rows(const Tensor<T>& probs, const std::string& where) {
  double worst = 0.0;
  for (std::size_t n = 0; n < probs.dim(0); ++n) {
    double sum = 0.0;
    for (std::size_t c = 0; c < probs.dim(1); ++c) {
      const double p = probs(n, c);
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw NumericError(where + ": invalid probability " + std::to_string(p));
      sum += p;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  if (worst > prob_row_tolerance<T>()) {
    throw NumericError(where + ": probability row sums off by " + std::to_string(worst));
  }
  return worst;
}

std::vector<int> batch_labels(const LabeledSet& set, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(set.labels[i]);
  return out;
}

}  // namespace

template <typename T>
Evaluation<T> score(const Model<T>& model, const LabeledSet& set, const FocalLossConfig& loss_cfg,
                    std::size_t batch_size) {
  Evaluation<T> ev;
  const std::size_t n = set.size(), C = model.spec().num_classes;
  ev.probs = Tensor<T>({n, C});
  ev.predictions.resize(n);
  if (n == 0) return ev;
  double loss_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch_size) {
    idx.resize(std::min(batch_size, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto fwd = model_forward(model, make_batch<T>(set, idx), false);
    ev.max_row_sum_error = std::max(ev.max_row_sum_error, check_prob_rows(fwd.probs, "inference"));
    const auto labels = batch_labels(set, idx);
    loss_sum += focal_loss(fwd.probs, one_hot<T>(labels, C), loss_cfg).loss * static_cast<double>(idx.size());
    const auto pred = argmax_last(fwd.probs);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ev.predictions[start + i] = static_cast<int>(pred[i]);
      for (std::size_t c = 0; c < C; ++c) ev.probs(start + i, c) = fwd.probs(i, c);
    }
  }
  ev.cm = confusion_from_predictions(set.labels, ev.predictions);
  ev.loss = loss_sum / static_cast<double>(n);
  ev.accuracy = static_cast<double>(ev.cm.tp + ev.cm.tn) / static_cast<double>(n);
  return ev;
}

template <typename T>
ConfusionMatrix evaluate(const Model<T>& model, const LabeledSet& set) {
  return score(model, set).cm;
}

template <typename T>
std::vector<EpochLog> train_model(Model<T>& model, const LabeledSet& train, const LabeledSet* val,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidArgument("training set is empty");
  const auto loss_cfg = cfg.loss_config();
  const auto adam_cfg = cfg.adam_config();
  const std::size_t C = model.spec().num_classes;
  const bool has_val = val != nullptr && !val->empty();

  SeededRng rng(cfg.seed);
  AdamState<T> state;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochLog> logs;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, b = 1; start < order.size(); start += cfg.batch_size, ++b) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      const std::string where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(b);
      const auto labels = batch_labels(train, idx);
      auto fwd = model_forward(model, make_batch<T>(train, idx), true);
      log.max_row_sum_error = std::max(log.max_row_sum_error, check_prob_rows(fwd.probs, where));
      const auto loss = focal_loss(fwd.probs, one_hot<T>(labels, C), loss_cfg);
      if (!std::isfinite(loss.loss)) throw NumericError(where + ": non-finite loss");
      const auto grads = model_backward(model, *fwd.cache, loss.grad_logits);
      try {
        adam_step(model.parameters(), grads, state, adam_cfg);
      } catch (const NumericError& e) {
        throw NumericError(where + ": " + e.what());
      }
      model.mark_updated();
      loss_sum += loss.loss * static_cast<double>(idx.size());
      const auto pred = argmax_last(fwd.probs);
      for (std::size_t i = 0; i < idx.size(); ++i) correct += static_cast<int>(pred[i]) == labels[i];
    }
    log.train_loss = loss_sum / static_cast<double>(train.size());
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    if (has_val) {
      const auto ev = score(model, *val, loss_cfg, cfg.batch_size);
      log.has_validation = true;
      log.val_loss = ev.loss;
      log.val_accuracy = ev.accuracy;
      log.max_row_sum_error = std::max(log.max_row_sum_error, ev.max_row_sum_error);
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    logs.push_back(log);
    if (on_epoch) on_epoch(log);

    if (cfg.patience > 0 && has_val) {
      if (log.val_loss < best_val) {
        best_val = log.val_loss;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  }
  return logs;
}

template <typename T>
std::vector<EpochLog> fit(Model<T>& model, const LabeledSet& train, const TrainConfig& cfg,
                          const EpochCallback& on_epoch) {
  auto [train_side, holdout] = holdout_split(train, cfg.val_fraction, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  if (cfg.augment) train_side = augment_set(train_side);
  return train_model(model, train_side, &holdout, cfg, on_epoch);
}

template <typename T>
CrossValResult cross_validate(const ModelSpec& spec, const LabeledSet& data, const TrainConfig& cfg,
                              const FoldPlan& plan, const CrossValHooks<T>& hooks) {
  if (plan.sample_count() != data.size()) {
    throw InvalidArgument("fold plan covers " + std::to_string(plan.sample_count()) + " samples, dataset has " +
                          std::to_string(data.size()));
  }
  CrossValResult result;
  result.times_validated.assign(data.size(), 0);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& val_idx = plan.folds[f];
    const auto train_idx = plan.training_indices(f);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(f);
    Model<T> model(spec, fold_cfg.seed);
    if (hooks.on_model_built) hooks.on_model_built(model, f);
    EpochCallback cb;
    if (hooks.on_epoch) cb = [&](const EpochLog& log) { hooks.on_epoch(f, log); };
    result.logs.push_back(fit(model, data.subset(train_idx), fold_cfg, cb));
    const auto cm = evaluate(model, data.subset(val_idx));
    for (std::size_t i : val_idx) ++result.times_validated[i];
    result.folds.push_back(metrics(cm));
  }
  result.summary = summarize(result.folds);
  return result;
}

template <typename T>
std::vector<ArchResult> compare_archs(const LabeledSet& train, const LabeledSet& test, std::size_t height,
                                      std::size_t width, const TrainConfig& cfg,
                                      const std::function<void(HiddenArch, const EpochLog&)>& on_epoch) {
  if (test.empty()) throw InvalidArgument("architecture comparison needs a nonempty test set");
  std::vector<ArchResult> out;
  for (HiddenArch arch : kAllArchs) {
    Model<T> model(ModelSpec::for_arch(arch, height, width), cfg.seed);
    EpochCallback cb;
    if (on_epoch) cb = [&](const EpochLog& log) { on_epoch(arch, log); };
    auto logs = fit(model, train, cfg, cb);
    out.push_back({arch, metrics(evaluate(model, test)), std::move(logs)});
  }
  return out;
}

#define TDCNN_INSTANTIATE(T)                                                                                      \
  template Evaluation<T> score(const Model<T>&, const LabeledSet&, const FocalLossConfig&, std::size_t);          \
  template ConfusionMatrix evaluate(const Model<T>&, const LabeledSet&);                                          \
  template std::vector<EpochLog> train_model(Model<T>&, const LabeledSet&, const LabeledSet*, const TrainConfig&, \
                                             const EpochCallback&);                                               \
  template std::vector<EpochLog> fit(Model<T>&, const LabeledSet&, const TrainConfig&, const EpochCallback&);     \
  template CrossValResult cross_validate(const ModelSpec&, const LabeledSet&, const TrainConfig&, const FoldPlan&, \
                                         const CrossValHooks<T>&);                                                \
  template std::vector<ArchResult> compare_archs<T>(const LabeledSet&, const LabeledSet&, std::size_t,            \
                                                    std::size_t, const TrainConfig&,                              \
                                                    const std::function<void(HiddenArch, const EpochLog&)>&);

TDCNN_INSTANTIATE(float)
TDCNN_INSTANTIATE(double)
#undef TDCNN_INSTANTIATE

}  // namespace tdcnn
