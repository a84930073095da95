#pragma once

#include <vector>

#include "tdcnn/tensor.hpp"

namespace tdcnn {

/// Focal loss −w_k·(1−P_k)^γ·ln(P_k) per sample, k the true class.
struct FocalLossConfig {
  double gamma = 2.0;
  std::vector<double> class_weights;  // empty means 1 for every class

  void validate(std::size_t num_classes) const;
  double weight(std::size_t cls) const { return class_weights.empty() ? 1.0 : class_weights[cls]; }
};

/// Probabilities are clamped to this before the log.
inline constexpr double kLogClamp = 1e-12;

template <typename T>
struct LossResult {
  double loss = 0.0;       // mean over the batch
  Tensor<T> grad_logits;   // d(loss)/d(logits) through the softmax
};

/// Loss and its gradient with respect to the logits that produced `probs`.
///
/// `probs` must be softmax rows (each summing to 1 within 1e-6) and
/// `one_hot` rows must contain a single 1. The gradient is the analytic chain
/// rule through both (1−P)^γ and ln(P), composed with the softmax Jacobian.
template <typename T>
LossResult<T> focal_loss(const Tensor<T>& probs, const Tensor<T>& one_hot, const FocalLossConfig& cfg);

/// Mean categorical cross-entropy with the same clamp; the γ = 0 reference.
template <typename T>
double cross_entropy(const Tensor<T>& probs, const Tensor<T>& one_hot);

template <typename T>
Tensor<T> one_hot(const std::vector<int>& labels, std::size_t num_classes);

}  // namespace tdcnn
