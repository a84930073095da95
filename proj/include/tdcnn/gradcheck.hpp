#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdcnn/arch.hpp"

namespace tdcnn {

struct GradcheckOptions {
  std::uint64_t seed = 7;
  /// Scales the analytic conv gradients by 1.01 before comparing; lets tests
  /// confirm the check catches a broken backward pass.
  bool perturb_conv_backward = false;
  std::size_t model_samples = 20;
};

struct GradcheckEntry {
  std::string name;  // conv2d, maxpool, dense, relu, flatten, softmax_focal, model
  double max_rel_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Error between analytic and central-difference gradients, relative to the
/// largest magnitude in either: max|a − n| / max(max|a|, max|n|).
double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

/// Smallest valid spec for the whole-model check: 32×32 input,
/// filters [2,2,2,2,2], hidden [4].
ModelSpec tiny_model_spec();

/// Finite-difference checks in 64-bit for every layer type (threshold 1e-5)
/// and the tiny whole model on sampled parameters (threshold 1e-4). Central
/// differences use h = 1e-5·max(1, |x|).
std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& opts = {});

}  // namespace tdcnn
