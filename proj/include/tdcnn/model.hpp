#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdcnn/adam.hpp"
#include "tdcnn/arch.hpp"
#include "tdcnn/layers.hpp"

namespace tdcnn {

/// Parameters materialized from a ModelSpec.
template <typename T>
class Model {
 public:
  using value_type = T;

  /// He-initialized weights, N(0, 2/fan_in), drawn layer by layer from
  /// SeededRng(seed); all biases zero.
  Model(ModelSpec spec, std::uint64_t seed);

  /// All parameters zero. Used when loading checkpoints.
  static Model zeros(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::array<Conv2D<T>, kConvStages>& convs() noexcept { return convs_; }
  const std::array<Conv2D<T>, kConvStages>& convs() const noexcept { return convs_; }
  std::vector<Dense<T>>& hidden() noexcept { return hidden_; }
  const std::vector<Dense<T>>& hidden() const noexcept { return hidden_; }
  Dense<T>& head() noexcept { return head_; }
  const Dense<T>& head() const noexcept { return head_; }
  Dense<T>& output() noexcept { return output_; }
  const Dense<T>& output() const noexcept { return output_; }

  /// Every parameter in a fixed order: conv1..conv5, hidden1..hiddenN, head,
  /// output; weight before bias.
  std::vector<ParamRef<T>> parameters();
  std::vector<std::pair<std::string, const Tensor<T>*>> parameters() const;

  std::size_t param_count() const;

  /// Bumped after every in-place parameter update; caches from an older
  /// version are rejected by model_backward.
  std::uint64_t version() const noexcept { return version_; }
  void mark_updated() noexcept { ++version_; }

  friend bool operator==(const Model& a, const Model& b) {
    return a.spec_ == b.spec_ && a.seed_ == b.seed_ && a.params_equal(b);
  }

 private:
  struct ZeroTag {};
  Model(ModelSpec spec, std::uint64_t seed, ZeroTag);
  bool params_equal(const Model& other) const;

  ModelSpec spec_;
  std::uint64_t seed_;
  std::array<Conv2D<T>, kConvStages> convs_;
  std::vector<Dense<T>> hidden_;
  Dense<T> head_;
  Dense<T> output_;
  std::uint64_t version_ = 0;
};

template <typename T>
std::size_t param_count(const Model<T>& model) {
  return model.param_count();
}

template <typename T>
struct ModelCache {
  const Model<T>* model = nullptr;
  std::uint64_t version = 0;
  std::array<ConvCache<T>, kConvStages> conv;
  std::array<ReluCache<T>, kConvStages> conv_relu;
  std::array<PoolCache, kConvStages> pool;
  Shape pooled_shape;
  std::vector<DenseCache<T>> hidden;
  std::vector<ReluCache<T>> hidden_relu;
  DenseCache<T> head;
  ReluCache<T> head_relu;
  DenseCache<T> output;
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;  // N × num_classes
  Tensor<T> probs;   // softmax(logits)
  std::optional<ModelCache<T>> cache;  // present only in train mode
};

/// batch is N×1×H×W at the spec's input size.
template <typename T>
ForwardResult<T> model_forward(const Model<T>& model, const Tensor<T>& batch, bool train_mode,
                               ConvPath path = ConvPath::Lowered);

/// Gradients for every parameter, in Model::parameters() order, given the
/// gradient of the loss with respect to the logits.
template <typename T>
std::vector<Tensor<T>> model_backward(const Model<T>& model, const ModelCache<T>& cache,
                                      const Tensor<T>& grad_logits);

}  // namespace tdcnn
