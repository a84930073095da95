#include "tdcnn/tensor.hpp"

#include <cmath>

namespace tdcnn {

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

template <typename T>
void check_matmul_shapes(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
}

// i-p-j order: each c[i][j] sees its terms in ascending p, and the inner loop
// runs contiguously over j so it vectorizes without reassociating sums.
template <typename T>
void gemm_ipj(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  check_matmul_shapes(a, b);
  Tensor<T> c({a.dim(0), b.dim(1)});
  gemm_ipj(a.data().data(), b.data().data(), c.data().data(), a.dim(0), a.dim(1), b.dim(1));
  return c;
}

template <typename T>
void matmul_accumulate(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& c) {
  check_matmul_shapes(a, b);
  if (c.rank() != 2 || c.dim(0) != a.dim(0) || c.dim(1) != b.dim(1)) {
    throw ShapeError("matmul_accumulate output " + to_string(c.shape()) + " does not fit " +
                     to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  gemm_ipj(a.data().data(), b.data().data(), c.data().data(), a.dim(0), a.dim(1), b.dim(1));
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  if (a.rank() != 2) throw ShapeError("transpose expects rank 2, got " + to_string(a.shape()));
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return out;
}

template <typename T>
std::vector<std::size_t> argmax_last(const Tensor<T>& t) {
  if (t.rank() != 2 || t.dim(1) == 0) {
    throw ShapeError("argmax_last expects an n x c tensor with c >= 1, got " + to_string(t.shape()));
  }
  const std::size_t n = t.dim(0), c = t.dim(1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (t(i, j) > t(i, best)) best = j;
    }
    out[i] = best;
  }
  return out;
}

#define TDCNN_INSTANTIATE(T)                                                         \
  template class Tensor<T>;                                                          \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                     \
  template void matmul_accumulate(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);   \
  template Tensor<T> transpose(const Tensor<T>&);                                    \
  template std::vector<std::size_t> argmax_last(const Tensor<T>&);

TDCNN_INSTANTIATE(float)
TDCNN_INSTANTIATE(double)
#undef TDCNN_INSTANTIATE

}  // namespace tdcnn
