#include "tdcnn/loss.hpp"

#include <cmath>

namespace tdcnn {

void FocalLossConfig::validate(std::size_t num_classes) const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("focal loss gamma must be >= 0");
  if (class_weights.empty()) return;
  if (class_weights.size() != num_classes) {
    throw InvalidArgument("focal loss has " + std::to_string(class_weights.size()) +
                          " class weights for " + std::to_string(num_classes) + " classes");
  }
  for (double w : class_weights) {
    if (!(w > 0.0)) throw InvalidArgument("focal loss class weights must be > 0");
  }
}

namespace {

// Returns the true class of every row, rejecting malformed inputs.
template <typename T>
std::vector<std::size_t> check_targets(const Tensor<T>& probs, const Tensor<T>& one_hot) {
  if (probs.rank() != 2 || probs.shape() != one_hot.shape()) {
    throw ShapeError("loss expects matching N x C probabilities and targets, got " +
                     to_string(probs.shape()) + " and " + to_string(one_hot.shape()));
  }
  const std::size_t N = probs.dim(0), C = probs.dim(1);
  std::vector<std::size_t> truth(N);
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t ones = 0;
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const T t = one_hot(n, c);
      if (t == T(1)) {
        ++ones;
        truth[n] = c;
      } else if (t != T(0)) {
        ones = 2;
      }
      const double p = probs(n, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("row " + std::to_string(n) + " holds a value outside [0, 1]");
      }
      sum += p;
    }
    if (ones != 1) throw InvalidArgument("row " + std::to_string(n) + " is not a one-hot target");
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvalidArgument("row " + std::to_string(n) + " is not a probability row (sum " +
                            std::to_string(sum) + ")");
    }
  }
  return truth;
}

}  // namespace

template <typename T>
LossResult<T> focal_loss(const Tensor<T>& probs, const Tensor<T>& one_hot, const FocalLossConfig& cfg) {
  const auto truth = check_targets(probs, one_hot);
  const std::size_t N = probs.dim(0), C = probs.dim(1);
  cfg.validate(C);
  const double gamma = cfg.gamma;

  LossResult<T> r{0.0, Tensor<T>(probs.shape())};
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t k = truth[n];
    const double w = cfg.weight(k);
    const double p = probs(n, k);
    const double q = 1.0 - p;
    const double logp = std::log(std::max(p, kLogClamp));
    total += -w * std::pow(q, gamma) * logp;

    // P·dL/dP; the γ-term vanishes when γ = 0 or P = 1, where its power form
    // would otherwise evaluate 0·∞.
    const double focus = (gamma == 0.0 || q == 0.0) ? 0.0 : gamma * std::pow(q, gamma - 1.0) * p * logp;
    const double coef = w * (focus - std::pow(q, gamma)) / static_cast<double>(N);
    for (std::size_t c = 0; c < C; ++c) {
      const double delta = c == k ? 1.0 : 0.0;
      r.grad_logits(n, c) = static_cast<T>(coef * (delta - static_cast<double>(probs(n, c))));
    }
  }
  r.loss = N == 0 ? 0.0 : total / static_cast<double>(N);
  return r;
}

template <typename T>
double cross_entropy(const Tensor<T>& probs, const Tensor<T>& one_hot) {
  const auto truth = check_targets(probs, one_hot);
  const std::size_t N = probs.dim(0);
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    total += -std::log(std::max(static_cast<double>(probs(n, truth[n])), kLogClamp));
  }
  return N == 0 ? 0.0 : total / static_cast<double>(N);
}

template <typename T>
Tensor<T> one_hot(const std::vector<int>& labels, std::size_t num_classes) {
  Tensor<T> t({labels.size(), num_classes});
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= num_classes) {
      throw InvalidArgument("label " + std::to_string(labels[n]) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
    t(n, static_cast<std::size_t>(labels[n])) = T(1);
  }
  return t;
}

#define TDCNN_INSTANTIATE(T)                                                                     \
  template LossResult<T> focal_loss(const Tensor<T>&, const Tensor<T>&, const FocalLossConfig&); \
  template double cross_entropy(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> one_hot(const std::vector<int>&, std::size_t);

TDCNN_INSTANTIATE(float)
TDCNN_INSTANTIATE(double)
#undef TDCNN_INSTANTIATE

}  // namespace tdcnn
