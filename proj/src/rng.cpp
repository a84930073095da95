#include "tdcnn/rng.hpp"

#include <cmath>
#include <numbers>

namespace tdcnn {

std::uint64_t SeededRng::uniform_index(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("uniform_index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double SeededRng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return mean + stddev * r * std::cos(theta);
}

template <typename T>
Tensor<T> rng_normal(SeededRng& rng, std::size_t n, double mean, double stddev) {
  if (!(stddev >= 0.0)) throw InvalidArgument("rng_normal: stddev must be >= 0");
  Tensor<T> out({n});
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(rng.normal(mean, stddev));
  return out;
}

template Tensor<float> rng_normal(SeededRng&, std::size_t, double, double);
template Tensor<double> rng_normal(SeededRng&, std::size_t, double, double);

}  // namespace tdcnn
