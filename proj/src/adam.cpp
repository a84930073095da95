#include "tdcnn/adam.hpp"

#include <cmath>

namespace tdcnn {

template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& state, const AdamConfig& cfg) {
  if (grads.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].value->shape()) {
      throw ShapeError("adam_step: gradient " + to_string(grads[i].shape()) + " for parameter " +
                       params[i].name + " " + to_string(params[i].value->shape()));
    }
    if (!grads[i].all_finite()) {
      throw NumericError("adam_step: non-finite gradient in " + params[i].name);
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->shape());
      state.v.emplace_back(p.value->shape());
    }
  } else if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks a different parameter set");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
  const T lr = static_cast<T>(cfg.lr), eps = static_cast<T>(cfg.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].value->data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T mhat = m[j] / c1;
      const T vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template void adam_step(const std::vector<ParamRef<float>>&, const std::vector<Tensor<float>>&,
                        AdamState<float>&, const AdamConfig&);
template void adam_step(const std::vector<ParamRef<double>>&, const std::vector<Tensor<double>>&,
                        AdamState<double>&, const AdamConfig&);

}  // namespace tdcnn
