#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "tdcnn/rng.hpp"
#include "tdcnn/tensor.hpp"

namespace tdcnn::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("tdcnn_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

inline Tensor<double> random_tensor(SeededRng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Central differences, h = 1e-5·max(1, |x|), perturbing `x` in place.
inline std::vector<double> finite_diff(Tensor<double>& x, const std::function<double()>& f) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i], h = 1e-5 * std::max(1.0, std::abs(orig));
    x[i] = orig + h;
    const double up = f();
    x[i] = orig - h;
    const double down = f();
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// max|a − n| / max(max|a|, max|n|).
inline double max_rel_error(const Tensor<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return scale == 0.0 ? 0.0 : diff / scale;
}

}  // namespace tdcnn::test
