#pragma once

#include <cstdint>
#include <filesystem>

#include "tdcnn/image.hpp"
#include "tdcnn/manifest.hpp"

namespace tdcnn {

/// Synthetic brain-scan stand-in: a smooth radial disc on a dark background
/// with Gaussian noise; tumor images add one brighter rotated ellipse inside
/// the disc.
struct SynthConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t healthy = 500;
  std::size_t tumor = 500;
  double noise_stddev = 8.0;
  double tumor_delta = 60.0;   // intensity added inside the ellipse
  double radius_min = 3.0;     // ellipse semi-axes, pixels
  double radius_max = 8.0;
  std::size_t subject_block = 10;  // consecutive images sharing a subject id
  std::uint64_t seed = 42;

  void validate() const;
  /// Disc radius the ellipse must fit inside.
  double brain_radius() const;
};

/// One image; randomness comes only from `image_seed`.
GrayImage synth_image(const SynthConfig& cfg, int label, std::uint64_t image_seed);

/// Writes img_NNNNN.pgm files and manifest.csv into `out_dir` and returns
/// the manifest. Labels are shuffled from the master seed; image i uses the
/// seed (master ⊕ i).
Manifest generate_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace tdcnn
