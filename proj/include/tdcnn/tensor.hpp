#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tdcnn/error.hpp"

namespace tdcnn {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/// Dense row-major array. 4-D tensors are laid out N×C×H×W.
///
/// `T` is the model precision (`float` for training, `double` for
/// gradient checks); a model never mixes the two.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  /// Rank-0 scalar holding zero.
  Tensor() : data_(1, T(0)) {}

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != element_count(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  /// Same elements under a new shape with an equal element count.
  Tensor reshaped(Shape shape) const& {
    Tensor out(*this);
    out.reshape(std::move(shape));
    return out;
  }
  Tensor reshaped(Shape shape) && {
    reshape(std::move(shape));
    return std::move(*this);
  }

  void reshape(Shape shape) {
    if (element_count(shape) != data_.size()) {
      throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    shape_ = std::move(shape);
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// c = a·b with every c[i][j] accumulated over ascending p, starting from zero.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// c += a·b, each element accumulated over ascending p on top of its current value.
template <typename T>
void matmul_accumulate(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c);

template <typename T>
Tensor<T> transpose(const Tensor<T>& a);

/// Row-wise argmax of an n×c tensor; ties go to the lowest index.
template <typename T>
std::vector<std::size_t> argmax_last(const Tensor<T>& t);

/// Element-wise conversion between precisions.
template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
  std::vector<To> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<To>(t[i]);
  return Tensor<To>(t.shape(), std::move(out));
}

}  // namespace tdcnn
