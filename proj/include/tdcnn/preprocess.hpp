#pragma once

#include <array>
#include <cstddef>

#include "tdcnn/image.hpp"
#include "tdcnn/tensor.hpp"

namespace tdcnn {

/// Luma round(0.299R + 0.587G + 0.114B). One-channel input passes through;
/// any other channel count is rejected.
GrayImage to_grayscale(const ColorImage& img);

/// Median of each 3×3 neighborhood with edge pixels replicated outward.
GrayImage median_filter_3x3(const GrayImage& img);

/// Signed 4-neighbor Laplacian response under replicate padding.
std::vector<int> laplacian_edges(const GrayImage& img);

/// clamp(img + laplacian(img), 0, 255). Needs at least 3×3 pixels.
GrayImage highpass_enhance(const GrayImage& img);

/// Bilinear resampling with corner-aligned coordinates (the first and last
/// rows/columns of input and output coincide).
GrayImage resize(const GrayImage& img, std::size_t out_h, std::size_t out_w);

/// Counterclockwise quarter turn.
GrayImage rotate90(const GrayImage& img);
/// Mirrors columns.
GrayImage flip_horizontal(const GrayImage& img);

/// {original, rot90, rot180, rot270, horizontal flip}.
std::array<GrayImage, 5> augment(const GrayImage& img);

/// Pixels scaled by 1/255 into a 1×H×W tensor.
template <typename T>
Tensor<T> normalize(const GrayImage& img);

struct PreprocessOptions {
  std::size_t height = 300;
  std::size_t width = 300;
  bool denoise = true;  // 3×3 median
  bool enhance = true;  // Laplacian sharpen
};

/// median → high-pass enhance → resize. The grayscale step happens when the
/// image is decoded.
GrayImage preprocess(const GrayImage& img, const PreprocessOptions& opts);

}  // namespace tdcnn
