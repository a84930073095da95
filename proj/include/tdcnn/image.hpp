#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tdcnn/error.hpp"

namespace tdcnn {

/// Single-channel 8-bit image, row-major.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), pixels(h * w, fill) {}
  GrayImage(std::size_t h, std::size_t w, std::vector<std::uint8_t> px)
      : height(h), width(w), pixels(std::move(px)) {
    if (pixels.size() != h * w) throw ShapeError("pixel count does not match image extents");
  }

  std::uint8_t& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }

  /// Pixel with coordinates clamped into the image (replicate padding).
  std::uint8_t clamped(std::ptrdiff_t r, std::ptrdiff_t c) const {
    r = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(r, 0), static_cast<std::ptrdiff_t>(height) - 1);
    c = std::min<std::ptrdiff_t>(std::max<std::ptrdiff_t>(c, 0), static_cast<std::ptrdiff_t>(width) - 1);
    return pixels[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)];
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Interleaved 8-bit image with an arbitrary channel count.
struct ColorImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;
};

}  // namespace tdcnn
