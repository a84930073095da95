#include "tdcnn/layers.hpp"

#include <cmath>

namespace tdcnn {

namespace {

template <typename T>
void check_conv_input(const Tensor<T>& x, const Conv2D<T>& layer) {
  if (layer.weight.rank() != 4 || layer.weight.dim(2) != 3 || layer.weight.dim(3) != 3) {
    throw ShapeError("conv2d weight must be out x in x 3 x 3, got " + to_string(layer.weight.shape()));
  }
  if (x.rank() != 4) throw ShapeError("conv2d expects N x C x H x W input, got " + to_string(x.shape()));
  if (x.dim(1) != layer.in_channels()) {
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(x.dim(1)) +
                     " channels, layer expects " + std::to_string(layer.in_channels()));
  }
  if (layer.bias.size() != layer.out_channels()) {
    throw ShapeError("conv2d bias length " + std::to_string(layer.bias.size()) +
                     " does not match " + std::to_string(layer.out_channels()) + " output channels");
  }
}

// Patch matrix of one sample: row k = c·9 + u·3 + v, column s = i·W + j,
// entry x_pad[c][i+u][j+v].
template <typename T>
Tensor<T> im2col(const Tensor<T>& x, std::size_t n) {
  const std::size_t C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor<T> patches({C * 9, H * W});
  T* out = patches.data().data();
  for (std::size_t c = 0; c < C; ++c) {
    const T* plane = &x(n, c, 0, 0);
    for (std::size_t u = 0; u < 3; ++u) {
      for (std::size_t v = 0; v < 3; ++v) {
        T* row = out + ((c * 3 + u) * 3 + v) * H * W;
        for (std::size_t i = 0; i < H; ++i) {
          const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + u) - 1;
          T* dst = row + i * W;
          if (si < 0 || si >= static_cast<std::ptrdiff_t>(H)) {
            std::fill(dst, dst + W, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(si) * W;
          for (std::size_t j = 0; j < W; ++j) {
            const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j + v) - 1;
            dst[j] = (sj < 0 || sj >= static_cast<std::ptrdiff_t>(W)) ? T(0) : src[sj];
          }
        }
      }
    }
  }
  return patches;
}

// Scatter-add of patch gradients back onto one sample's input gradient.
template <typename T>
void col2im_add(const Tensor<T>& grad_patches, Tensor<T>& grad_x, std::size_t n) {
  const std::size_t C = grad_x.dim(1), H = grad_x.dim(2), W = grad_x.dim(3);
  const T* in = grad_patches.data().data();
  for (std::size_t c = 0; c < C; ++c) {
    T* plane = &grad_x(n, c, 0, 0);
    for (std::size_t u = 0; u < 3; ++u) {
      for (std::size_t v = 0; v < 3; ++v) {
        const T* row = in + ((c * 3 + u) * 3 + v) * H * W;
        for (std::size_t i = 0; i < H; ++i) {
          const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + u) - 1;
          if (si < 0 || si >= static_cast<std::ptrdiff_t>(H)) continue;
          T* dst = plane + static_cast<std::size_t>(si) * W;
          const T* src = row + i * W;
          for (std::size_t j = 0; j < W; ++j) {
            const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j + v) - 1;
            if (sj >= 0 && sj < static_cast<std::ptrdiff_t>(W)) dst[sj] += src[j];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv_direct(const Tensor<T>& x, const Conv2D<T>& layer) {
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = layer.out_channels();
  Tensor<T> y({N, O, H, W});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          T acc = layer.bias[o];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t u = 0; u < 3; ++u)
              for (std::size_t v = 0; v < 3; ++v) {
                const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + u) - 1;
                const std::ptrdiff_t sj = static_cast<std::ptrdiff_t>(j + v) - 1;
                const bool inside = si >= 0 && sj >= 0 && si < static_cast<std::ptrdiff_t>(H) &&
                                    sj < static_cast<std::ptrdiff_t>(W);
                const T xv = inside ? x(n, c, static_cast<std::size_t>(si), static_cast<std::size_t>(sj)) : T(0);
                acc += layer.weight(o, c, u, v) * xv;
              }
          y(n, o, i, j) = acc;
        }
  return y;
}

template <typename T>
Tensor<T> conv_lowered(const Tensor<T>& x, const Conv2D<T>& layer) {
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = layer.out_channels(), HW = H * W;
  const Tensor<T> wmat = layer.weight.reshaped({O, C * 9});
  Tensor<T> y({N, O, H, W});
  Tensor<T> ys({O, HW});
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t o = 0; o < O; ++o) std::fill_n(&ys(o, 0), HW, layer.bias[o]);
    matmul_accumulate(wmat, im2col(x, n), ys);
    std::copy(ys.data().begin(), ys.data().end(), &y(n, 0, 0, 0));
  }
  return y;
}

template <typename T>
void check_same_shape(const Tensor<T>& grad_y, const Shape& expected, const char* what) {
  if (grad_y.shape() != expected) {
    throw ShapeError(std::string(what) + ": gradient shape " + to_string(grad_y.shape()) +
                     " does not match the cached forward output " + to_string(expected));
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D<T>& layer, ConvPath path) {
  check_conv_input(x, layer);
  return path == ConvPath::Direct ? conv_direct(x, layer) : conv_lowered(x, layer);
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D<T>& layer, ConvCache<T>& cache,
                         ConvPath path) {
  Tensor<T> y = conv2d_forward(x, layer, path);
  cache.layer = &layer;
  cache.input = x;
  cache.weight_shape = layer.weight.shape();
  cache.output_shape = y.shape();
  return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_y, const ConvCache<T>& cache) {
  if (cache.layer == nullptr) throw InvalidArgument("conv2d_backward: cache was never filled");
  if (cache.layer->weight.shape() != cache.weight_shape) {
    throw InvalidArgument("conv2d_backward: layer weights changed shape since the forward pass");
  }
  check_same_shape(grad_y, cache.output_shape, "conv2d_backward");
  const Tensor<T>& x = cache.input;
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = cache.layer->out_channels(), HW = H * W;

  ConvGrads<T> g{Tensor<T>(x.shape()), Tensor<T>({O, C * 9}), Tensor<T>({O})};
  const Tensor<T> wmat_t = transpose(cache.layer->weight.reshaped({O, C * 9}));
  Tensor<T> gy({O, HW});
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(&grad_y(n, 0, 0, 0), O * HW, gy.data().data());
    for (std::size_t o = 0; o < O; ++o) {
      T acc = g.bias[o];
      for (std::size_t s = 0; s < HW; ++s) acc += gy(o, s);
      g.bias[o] = acc;
    }
    matmul_accumulate(gy, transpose(im2col(x, n)), g.weight);
    col2im_add(matmul(wmat_t, gy), g.input, n);
  }
  g.weight.reshape({O, C, 3, 3});
  return g;
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, PoolCache& cache) {
  if (x.rank() != 4) throw ShapeError("maxpool expects N x C x H x W input, got " + to_string(x.shape()));
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t OH = H / 2, OW = W / 2;
  if (OH == 0 || OW == 0) {
    throw ShapeError("maxpool 2x2 on " + to_string(x.shape()) + " yields an empty output");
  }
  Tensor<T> y({N, C, OH, OW});
  cache.input_shape = x.shape();
  cache.output_shape = y.shape();
  cache.argmax.assign(y.size(), 0);
  std::size_t out = 0;
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < OH; ++i)
        for (std::size_t j = 0; j < OW; ++j, ++out) {
          std::size_t best = ((n * C + c) * H + 2 * i) * W + 2 * j;
          for (std::size_t u = 0; u < 2; ++u)
            for (std::size_t v = 0; v < 2; ++v) {
              const std::size_t idx = ((n * C + c) * H + 2 * i + u) * W + 2 * j + v;
              if (x[idx] > x[best]) best = idx;
            }
          y[out] = x[best];
          cache.argmax[out] = best;
        }
  return y;
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x) {
  PoolCache scratch;
  return maxpool_forward(x, scratch);
}

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& grad_y, const PoolCache& cache) {
  if (cache.input_shape.empty()) throw InvalidArgument("maxpool_backward: cache was never filled");
  check_same_shape(grad_y, cache.output_shape, "maxpool_backward");
  Tensor<T> gx(cache.input_shape);
  for (std::size_t k = 0; k < grad_y.size(); ++k) gx[cache.argmax[k]] += grad_y[k];
  return gx;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Dense<T>& layer) {
  if (x.rank() != 2 || layer.weight.rank() != 2 || x.dim(1) != layer.in_width()) {
    throw ShapeError("dense width mismatch: input " + to_string(x.shape()) + ", weight " +
                     to_string(layer.weight.shape()));
  }
  if (layer.bias.size() != layer.out_width()) {
    throw ShapeError("dense bias length " + std::to_string(layer.bias.size()) +
                     " does not match width " + std::to_string(layer.out_width()));
  }
  Tensor<T> y = matmul(x, layer.weight);
  const std::size_t N = y.dim(0), O = y.dim(1);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o) y(n, o) += layer.bias[o];
  return y;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Dense<T>& layer, DenseCache<T>& cache) {
  Tensor<T> y = dense_forward(x, layer);
  cache.layer = &layer;
  cache.input = x;
  cache.weight_shape = layer.weight.shape();
  cache.output_shape = y.shape();
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_y, const DenseCache<T>& cache) {
  if (cache.layer == nullptr) throw InvalidArgument("dense_backward: cache was never filled");
  if (cache.layer->weight.shape() != cache.weight_shape) {
    throw InvalidArgument("dense_backward: layer weights changed shape since the forward pass");
  }
  check_same_shape(grad_y, cache.output_shape, "dense_backward");
  DenseGrads<T> g;
  g.input = matmul(grad_y, transpose(cache.layer->weight));
  g.weight = matmul(transpose(cache.input), grad_y);
  const std::size_t N = grad_y.dim(0), O = grad_y.dim(1);
  g.bias = Tensor<T>({O});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o) g.bias[o] += grad_y(n, o);
  return g;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x);
  for (auto& v : y.data()) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x, ReluCache<T>& cache) {
  cache.input = x;
  return relu_forward(x);
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_y, const ReluCache<T>& cache) {
  check_same_shape(grad_y, cache.input.shape(), "relu_backward");
  Tensor<T> gx(grad_y.shape());
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = cache.input[i] > T(0) ? grad_y[i] : T(0);
  return gx;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2 || logits.dim(1) == 0) {
    throw ShapeError("softmax expects N x C with C >= 1, got " + to_string(logits.shape()));
  }
  const std::size_t N = logits.dim(0), C = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t n = 0; n < N; ++n) {
    T mx = logits(n, 0);
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits(n, c));
    T sum = 0;
    for (std::size_t c = 0; c < C; ++c) {
      p(n, c) = std::exp(logits(n, c) - mx);
      sum += p(n, c);
    }
    for (std::size_t c = 0; c < C; ++c) p(n, c) /= sum;
  }
  return p;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& x) {
  if (x.rank() != 4) throw ShapeError("flatten expects rank 4, got " + to_string(x.shape()));
  return x.reshaped({x.dim(0), x.dim(1) * x.dim(2) * x.dim(3)});
}

template <typename T>
Tensor<T> unflatten(const Tensor<T>& x, const Shape& shape) {
  return x.reshaped(shape);
}

#define TDCNN_INSTANTIATE(T)                                                                   \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Conv2D<T>&, ConvPath);             \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Conv2D<T>&, ConvCache<T>&,         \
                                    ConvPath);                                                 \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const ConvCache<T>&);                \
  template Tensor<T> maxpool_forward(const Tensor<T>&);                                        \
  template Tensor<T> maxpool_forward(const Tensor<T>&, PoolCache&);                            \
  template Tensor<T> maxpool_backward(const Tensor<T>&, const PoolCache&);                     \
  template Tensor<T> dense_forward(const Tensor<T>&, const Dense<T>&);                         \
  template Tensor<T> dense_forward(const Tensor<T>&, const Dense<T>&, DenseCache<T>&);         \
  template DenseGrads<T> dense_backward(const Tensor<T>&, const DenseCache<T>&);               \
  template Tensor<T> relu_forward(const Tensor<T>&);                                           \
  template Tensor<T> relu_forward(const Tensor<T>&, ReluCache<T>&);                            \
  template Tensor<T> relu_backward(const Tensor<T>&, const ReluCache<T>&);                     \
  template Tensor<T> softmax(const Tensor<T>&);                                                \
  template Tensor<T> flatten(const Tensor<T>&);                                                \
  template Tensor<T> unflatten(const Tensor<T>&, const Shape&);

TDCNN_INSTANTIATE(float)
TDCNN_INSTANTIATE(double)
#undef TDCNN_INSTANTIATE

}  // namespace tdcnn
