#include "tdcnn/model.hpp"

#include <cmath>

#include "tdcnn/rng.hpp"

namespace tdcnn {

template <typename T>
Model<T>::Model(ModelSpec spec, std::uint64_t seed, ZeroTag) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  std::size_t in = 1;
  for (std::size_t i = 0; i < kConvStages; ++i) {
    convs_[i] = Conv2D<T>(in, spec_.conv_filters[i]);
    in = spec_.conv_filters[i];
  }
  std::size_t width = spec_.flatten_width();
  for (std::size_t h : spec_.hidden) {
    hidden_.emplace_back(width, h);
    width = h;
  }
  head_ = Dense<T>(width, spec_.head_width);
  output_ = Dense<T>(spec_.head_width, spec_.num_classes);
}

template <typename T>
Model<T> Model<T>::zeros(ModelSpec spec, std::uint64_t seed) {
  return Model(std::move(spec), seed, ZeroTag{});
}

template <typename T>
Model<T>::Model(ModelSpec spec, std::uint64_t seed) : Model(std::move(spec), seed, ZeroTag{}) {
  SeededRng rng(seed);
  auto he = [&rng](Tensor<T>& w, std::size_t fan_in) {
    const Tensor<T> draws = rng_normal<T>(rng, w.size(), 0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    std::copy(draws.data().begin(), draws.data().end(), w.data().begin());
  };
  for (auto& conv : convs_) he(conv.weight, conv.in_channels() * 9);
  for (auto& d : hidden_) he(d.weight, d.in_width());
  he(head_.weight, head_.in_width());
  he(output_.weight, output_.in_width());
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::parameters() {
  std::vector<ParamRef<T>> out;
  for (std::size_t i = 0; i < kConvStages; ++i) {
    const std::string p = "conv" + std::to_string(i + 1);
    out.push_back({p + ".weight", &convs_[i].weight});
    out.push_back({p + ".bias", &convs_[i].bias});
  }
  for (std::size_t i = 0; i < hidden_.size(); ++i) {
    const std::string p = "hidden" + std::to_string(i + 1);
    out.push_back({p + ".weight", &hidden_[i].weight});
    out.push_back({p + ".bias", &hidden_[i].bias});
  }
  out.push_back({"head.weight", &head_.weight});
  out.push_back({"head.bias", &head_.bias});
  out.push_back({"output.weight", &output_.weight});
  out.push_back({"output.bias", &output_.bias});
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> Model<T>::parameters() const {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  for (const auto& p : const_cast<Model*>(this)->parameters()) out.emplace_back(p.name, p.value);
  return out;
}

template <typename T>
std::size_t Model<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : parameters()) n += t->size();
  return n;
}

template <typename T>
bool Model<T>::params_equal(const Model& other) const {
  const auto a = parameters();
  const auto b = other.parameters();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(*a[i].second == *b[i].second)) return false;
  }
  return true;
}

template <typename T>
ForwardResult<T> model_forward(const Model<T>& model, const Tensor<T>& batch, bool train_mode, ConvPath path) {
  const ModelSpec& spec = model.spec();
  if (batch.rank() != 4 || batch.dim(1) != 1 || batch.dim(2) != spec.input_height ||
      batch.dim(3) != spec.input_width) {
    throw ShapeError("model expects N x 1 x " + std::to_string(spec.input_height) + " x " +
                     std::to_string(spec.input_width) + " input, got " + to_string(batch.shape()));
  }
  ForwardResult<T> r;
  ModelCache<T> c;
  Tensor<T> x = batch;
  for (std::size_t i = 0; i < kConvStages; ++i) {
    const auto& conv = model.convs()[i];
    if (train_mode) {
      x = conv2d_forward(x, conv, c.conv[i], path);
      x = relu_forward(x, c.conv_relu[i]);
      x = maxpool_forward(x, c.pool[i]);
    } else {
      x = maxpool_forward(relu_forward(conv2d_forward(x, conv, path)));
    }
  }
  c.pooled_shape = x.shape();
  x = flatten(x);
  c.hidden.resize(model.hidden().size());
  c.hidden_relu.resize(model.hidden().size());
  for (std::size_t i = 0; i < model.hidden().size(); ++i) {
    if (train_mode) {
      x = relu_forward(dense_forward(x, model.hidden()[i], c.hidden[i]), c.hidden_relu[i]);
    } else {
      x = relu_forward(dense_forward(x, model.hidden()[i]));
    }
  }
  if (train_mode) {
    x = relu_forward(dense_forward(x, model.head(), c.head), c.head_relu);
    r.logits = dense_forward(x, model.output(), c.output);
  } else {
    r.logits = dense_forward(relu_forward(dense_forward(x, model.head())), model.output());
  }
  r.probs = softmax(r.logits);
  if (train_mode) {
    c.model = &model;
    c.version = model.version();
    r.cache = std::move(c);
  }
  return r;
}

template <typename T>
std::vector<Tensor<T>> model_backward(const Model<T>& model, const ModelCache<T>& cache,
                                      const Tensor<T>& grad_logits) {
  if (cache.model == nullptr) throw InvalidArgument("model_backward: no cache from a train-mode forward");
  if (cache.model != &model || cache.version != model.version()) {
    throw InvalidArgument("model_backward: cache is stale (model parameters changed since the forward pass)");
  }
  const std::size_t nh = model.hidden().size();
  // Layout mirrors parameters(): conv pairs, hidden pairs, head pair, output pair.
  std::vector<Tensor<T>> grads(2 * (kConvStages + nh + 2));

  auto out = dense_backward(grad_logits, cache.output);
  grads[grads.size() - 2] = std::move(out.weight);
  grads[grads.size() - 1] = std::move(out.bias);

  auto head = dense_backward(relu_backward(out.input, cache.head_relu), cache.head);
  grads[grads.size() - 4] = std::move(head.weight);
  grads[grads.size() - 3] = std::move(head.bias);

  Tensor<T> g = std::move(head.input);
  for (std::size_t i = nh; i-- > 0;) {
    auto d = dense_backward(relu_backward(g, cache.hidden_relu[i]), cache.hidden[i]);
    grads[2 * (kConvStages + i)] = std::move(d.weight);
    grads[2 * (kConvStages + i) + 1] = std::move(d.bias);
    g = std::move(d.input);
  }

  g = unflatten(g, cache.pooled_shape);
  for (std::size_t i = kConvStages; i-- > 0;) {
    g = relu_backward(maxpool_backward(g, cache.pool[i]), cache.conv_relu[i]);
    auto cg = conv2d_backward(g, cache.conv[i]);
    grads[2 * i] = std::move(cg.weight);
    grads[2 * i + 1] = std::move(cg.bias);
    g = std::move(cg.input);
  }
  return grads;
}

template class Model<float>;
template class Model<double>;
template ForwardResult<float> model_forward(const Model<float>&, const Tensor<float>&, bool, ConvPath);
template ForwardResult<double> model_forward(const Model<double>&, const Tensor<double>&, bool, ConvPath);
template std::vector<Tensor<float>> model_backward(const Model<float>&, const ModelCache<float>&,
                                                   const Tensor<float>&);
template std::vector<Tensor<double>> model_backward(const Model<double>&, const ModelCache<double>&,
                                                    const Tensor<double>&);

}  // namespace tdcnn
