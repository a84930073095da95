#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdcnn/tensor.hpp"

namespace tdcnn {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// A named parameter tensor the optimizer may update in place.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
};

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;  // first moments, zero until the first step
  std::vector<Tensor<T>> v;  // second moments
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update over every parameter. All gradients are
/// checked for NaN/Inf first; a bad one throws NumericError naming the
/// parameter and nothing is modified.
template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& state, const AdamConfig& cfg = {});

}  // namespace tdcnn
