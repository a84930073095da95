#pragma once

#include <cstddef>
#include <vector>

#include "tdcnn/tensor.hpp"

namespace tdcnn {

/// 3×3 convolution, stride 1, one pixel of zero padding on every border, so
/// the spatial size is preserved.
template <typename T>
struct Conv2D {
  Tensor<T> weight;  // out_ch × in_ch × 3 × 3
  Tensor<T> bias;    // out_ch

  Conv2D() = default;
  Conv2D(std::size_t in_ch, std::size_t out_ch)
      : weight({out_ch, in_ch, 3, 3}), bias({out_ch}) {}

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
};

/// Fully connected: y = x·W + b.
template <typename T>
struct Dense {
  Tensor<T> weight;  // in × out
  Tensor<T> bias;    // out

  Dense() = default;
  Dense(std::size_t in, std::size_t out) : weight({in, out}), bias({out}) {}

  std::size_t in_width() const { return weight.dim(0); }
  std::size_t out_width() const { return weight.dim(1); }
};

enum class ConvPath {
  Direct,   // nested loops over the padded input
  Lowered,  // patch matrix times the weight matrix
};

// Forward caches. A cache belongs to the forward call that filled it; the
// backward functions reject caches that are empty or do not match grad_y.

template <typename T>
struct ConvCache {
  const Conv2D<T>* layer = nullptr;
  Tensor<T> input;
  Shape weight_shape;
  Shape output_shape;
};

template <typename T>
struct DenseCache {
  const Dense<T>* layer = nullptr;
  Tensor<T> input;
  Shape weight_shape;
  Shape output_shape;
};

struct PoolCache {
  Shape input_shape;
  Shape output_shape;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

template <typename T>
struct ReluCache {
  Tensor<T> input;
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

// y[n][o][i][j] = bias[o] + Σ_{c,u,v} w[o][c][u][v]·x_pad[n][c][i+u][j+v],
// summed in (c, u, v) order. Both paths produce bit-identical results.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D<T>& layer,
                         ConvPath path = ConvPath::Lowered);
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2D<T>& layer, ConvCache<T>& cache,
                         ConvPath path = ConvPath::Lowered);
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_y, const ConvCache<T>& cache);

/// 2×2 window, stride 2, odd extents floored.
template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x);
template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, PoolCache& cache);
/// Routes each gradient to its window's first maximum in row-major order.
template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& grad_y, const PoolCache& cache);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Dense<T>& layer);
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Dense<T>& layer, DenseCache<T>& cache);
template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_y, const DenseCache<T>& cache);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);
template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x, ReluCache<T>& cache);
/// grad_y ⊙ [x > 0]; the subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_y, const ReluCache<T>& cache);

/// Row-wise softmax of an N×C tensor with the row maximum subtracted first.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// N×C×H×W → N×(C·H·W). Row-major order is kept, so this is a reshape.
template <typename T>
Tensor<T> flatten(const Tensor<T>& x);
template <typename T>
Tensor<T> unflatten(const Tensor<T>& x, const Shape& shape);

}  // namespace tdcnn
