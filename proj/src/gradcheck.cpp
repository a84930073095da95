#include "tdcnn/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "tdcnn/layers.hpp"
#include "tdcnn/loss.hpp"
#include "tdcnn/model.hpp"
#include "tdcnn/rng.hpp"

namespace tdcnn {

namespace {

using Tensor64 = Tensor<double>;

constexpr double kLayerThreshold = 1e-5;
constexpr double kModelThreshold = 1e-4;

double step_for(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

Tensor64 random_tensor(SeededRng& rng, Shape shape) {
  Tensor64 t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Values kept at least `gap` away from zero so ReLU kinks stay out of reach
// of the finite-difference step.
Tensor64 random_away_from_zero(SeededRng& rng, Shape shape, double gap) {
  Tensor64 t(std::move(shape));
  for (auto& v : t.data()) {
    const double mag = rng.uniform(gap, 1.0);
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

double dot(const Tensor64& a, const Tensor64& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Central differences of f over every element of `x` (perturbed in place).
std::vector<double> numeric_grad(Tensor64& x, const std::function<double()>& f) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i], h = step_for(orig);
    x[i] = orig + h;
    const double up = f();
    x[i] = orig - h;
    const double down = f();
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> as_vector(const Tensor64& t) { return {t.data().begin(), t.data().end()}; }

GradcheckEntry entry(std::string name, double err, double threshold) {
  return {std::move(name), err, threshold, err < threshold};
}

GradcheckEntry check_conv(SeededRng& rng, bool perturb) {
  Conv2D<double> layer(2, 3);
  layer.weight = random_tensor(rng, {3, 2, 3, 3});
  layer.bias = random_tensor(rng, {3});
  Tensor64 x = random_tensor(rng, {2, 2, 5, 5});
  const Tensor64 r = random_tensor(rng, {2, 3, 5, 5});
  auto loss = [&] { return dot(conv2d_forward(x, layer), r); };

  ConvCache<double> cache;
  conv2d_forward(x, layer, cache);
  auto g = conv2d_backward(r, cache);
  if (perturb) {
    for (auto* t : {&g.input, &g.weight, &g.bias})
      for (auto& v : t->data()) v *= 1.01;
  }
  double err = relative_error(as_vector(g.input), numeric_grad(x, loss));
  err = std::max(err, relative_error(as_vector(g.weight), numeric_grad(layer.weight, loss)));
  err = std::max(err, relative_error(as_vector(g.bias), numeric_grad(layer.bias, loss)));
  return entry("conv2d", err, kLayerThreshold);
}

GradcheckEntry check_maxpool(SeededRng& rng) {
  Tensor64 x = random_tensor(rng, {2, 3, 6, 5});
  const Tensor64 r = random_tensor(rng, {2, 3, 3, 2});
  PoolCache cache;
  maxpool_forward(x, cache);
  const auto g = maxpool_backward(r, cache);
  const auto n = numeric_grad(x, [&] { return dot(maxpool_forward(x), r); });
  return entry("maxpool", relative_error(as_vector(g), n), kLayerThreshold);
}

GradcheckEntry check_dense(SeededRng& rng) {
  Dense<double> layer(4, 2);
  layer.weight = random_tensor(rng, {4, 2});
  layer.bias = random_tensor(rng, {2});
  Tensor64 x = random_tensor(rng, {3, 4});
  const Tensor64 r = random_tensor(rng, {3, 2});
  auto loss = [&] { return dot(dense_forward(x, layer), r); };
  DenseCache<double> cache;
  dense_forward(x, layer, cache);
  const auto g = dense_backward(r, cache);
  double err = relative_error(as_vector(g.input), numeric_grad(x, loss));
  err = std::max(err, relative_error(as_vector(g.weight), numeric_grad(layer.weight, loss)));
  err = std::max(err, relative_error(as_vector(g.bias), numeric_grad(layer.bias, loss)));
  return entry("dense", err, kLayerThreshold);
}

GradcheckEntry check_relu(SeededRng& rng) {
  Tensor64 x = random_away_from_zero(rng, {3, 6}, 1e-2);
  const Tensor64 r = random_tensor(rng, {3, 6});
  ReluCache<double> cache;
  relu_forward(x, cache);
  const auto g = relu_backward(r, cache);
  const auto n = numeric_grad(x, [&] { return dot(relu_forward(x), r); });
  return entry("relu", relative_error(as_vector(g), n), kLayerThreshold);
}

GradcheckEntry check_flatten(SeededRng& rng) {
  Tensor64 x = random_tensor(rng, {2, 3, 2, 2});
  const Tensor64 r = random_tensor(rng, {2, 12});
  const auto g = unflatten(r, x.shape());
  const auto n = numeric_grad(x, [&] { return dot(flatten(x), r); });
  return entry("flatten", relative_error(as_vector(g), n), kLayerThreshold);
}

GradcheckEntry check_softmax_focal(SeededRng& rng) {
  Tensor64 z = random_tensor(rng, {4, 2});
  for (auto& v : z.data()) v *= 3.0;
  const Tensor64 y = one_hot<double>({0, 1, 1, 0}, 2);
  const FocalLossConfig cfg{2.0, {}};
  const auto g = focal_loss(softmax(z), y, cfg).grad_logits;
  const auto n = numeric_grad(z, [&] { return focal_loss(softmax(z), y, cfg).loss; });
  return entry("softmax_focal", relative_error(as_vector(g), n), kLayerThreshold);
}

GradcheckEntry check_model(SeededRng& rng, std::size_t samples) {
  Model<double> model(tiny_model_spec(), rng.next_u64());
  // He init leaves biases at zero; random biases keep every unit active enough
  // for the check to exercise all parameters.
  for (auto& p : model.parameters()) {
    if (p.name.ends_with(".bias")) *p.value = random_tensor(rng, p.value->shape());
  }
  const auto& spec = model.spec();
  const Tensor64 x = random_tensor(rng, {3, 1, spec.input_height, spec.input_width});
  const Tensor64 y = one_hot<double>({1, 0, 1}, 2);
  const FocalLossConfig cfg{2.0, {}};
  auto loss = [&] { return focal_loss(model_forward(model, x, false).probs, y, cfg).loss; };

  const auto fwd = model_forward(model, x, true);
  const auto grads = model_backward(model, *fwd.cache, focal_loss(fwd.probs, y, cfg).grad_logits);

  // One element from every parameter tensor, the rest anywhere.
  auto params = model.parameters();
  std::vector<double> analytic, numeric;
  for (std::size_t s = 0; s < std::max(samples, params.size()); ++s) {
    const std::size_t p = s < params.size() ? s : rng.uniform_index(params.size());
    Tensor64& t = *params[p].value;
    const std::size_t i = rng.uniform_index(t.size());
    const double orig = t[i], h = step_for(orig);
    t[i] = orig + h;
    const double up = loss();
    t[i] = orig - h;
    const double down = loss();
    t[i] = orig;
    analytic.push_back(grads[p][i]);
    numeric.push_back((up - down) / (2.0 * h));
  }
  return entry("model", relative_error(analytic, numeric), kModelThreshold);
}

}  // namespace

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  if (analytic.size() != numeric.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  if (scale == 0.0) return 0.0;
  return diff / scale;
}

ModelSpec tiny_model_spec() {
  ModelSpec s;
  s.input_height = 32;
  s.input_width = 32;
  s.conv_filters = {2, 2, 2, 2, 2};
  s.hidden = {4};
  s.head_width = 8;
  return s;
}

std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& opts) {
  SeededRng rng(opts.seed);
  std::vector<GradcheckEntry> out;
  out.push_back(check_conv(rng, opts.perturb_conv_backward));
  out.push_back(check_maxpool(rng));
  out.push_back(check_dense(rng));
  out.push_back(check_relu(rng));
  out.push_back(check_flatten(rng));
  out.push_back(check_softmax_focal(rng));
  out.push_back(check_model(rng, opts.model_samples));
  return out;
}

}  // namespace tdcnn
