#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tdcnn/tensor.hpp"

namespace tdcnn {

/// Seeded pseudo-random stream over std::mt19937_64. Distributions and the
/// shuffle are hand-written so sequences match across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection-sampled so it is unbiased.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Box–Muller; the second value of each pair is kept for the next call.
  double normal(double mean, double stddev);

  /// Fisher–Yates.
  template <typename U>
  void shuffle(std::vector<U>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// n draws from N(mean, stddev²) as a rank-1 tensor. stddev must be >= 0.
template <typename T>
Tensor<T> rng_normal(SeededRng& rng, std::size_t n, double mean, double stddev);

}  // namespace tdcnn
