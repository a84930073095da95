#include "tdcnn/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace tdcnn {

GrayImage to_grayscale(const ColorImage& img) {
  if (img.pixels.size() != img.height * img.width * img.channels) {
    throw ShapeError("color image pixel count does not match its extents");
  }
  if (img.channels == 1) return GrayImage(img.height, img.width, img.pixels);
  if (img.channels != 3) {
    throw InvalidArgument("grayscale conversion expects 3 channels, got " + std::to_string(img.channels));
  }
  GrayImage out(img.height, img.width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double luma = 0.299 * img.pixels[3 * i] + 0.587 * img.pixels[3 * i + 1] + 0.114 * img.pixels[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

GrayImage median_filter_3x3(const GrayImage& img) {
  GrayImage out(img.height, img.width);
  std::array<std::uint8_t, 9> window;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      std::size_t k = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          window[k++] = img.clamped(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc);
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out.at(r, c) = window[4];
    }
  }
  return out;
}

std::vector<int> laplacian_edges(const GrayImage& img) {
  std::vector<int> edges(img.pixels.size());
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const auto ri = static_cast<std::ptrdiff_t>(r), ci = static_cast<std::ptrdiff_t>(c);
      edges[r * img.width + c] = 4 * img.at(r, c) - img.clamped(ri - 1, ci) - img.clamped(ri + 1, ci) -
                                 img.clamped(ri, ci - 1) - img.clamped(ri, ci + 1);
    }
  }
  return edges;
}

GrayImage highpass_enhance(const GrayImage& img) {
  if (img.height < 3 || img.width < 3) {
    throw InvalidArgument("high-pass enhancement needs at least 3x3 pixels");
  }
  const auto edges = laplacian_edges(img);
  GrayImage out(img.height, img.width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(img.pixels[i] + edges[i], 0, 255));
  }
  return out;
}

GrayImage resize(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw InvalidArgument("resize target must be at least 1x1");
  if (img.height == 0 || img.width == 0) throw InvalidArgument("cannot resize an empty image");
  if (out_h == img.height && out_w == img.width) return img;

  auto source = [](std::size_t i, std::size_t out, std::size_t in) {
    return out == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
  };
  GrayImage out(out_h, out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    const double y = source(r, out_h, img.height);
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < out_w; ++c) {
      const double x = source(c, out_w, img.width);
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = img.at(y0, x0) * (1.0 - fx) + img.at(y0, x1) * fx;
      const double bottom = img.at(y1, x0) * (1.0 - fx) + img.at(y1, x1) * fx;
      const double v = top * (1.0 - fy) + bottom * fy;
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

GrayImage rotate90(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < out.height; ++i)
    for (std::size_t j = 0; j < out.width; ++j) out.at(i, j) = img.at(j, img.width - 1 - i);
  return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out(img.height, img.width);
  for (std::size_t i = 0; i < img.height; ++i)
    for (std::size_t j = 0; j < img.width; ++j) out.at(i, j) = img.at(i, img.width - 1 - j);
  return out;
}

std::array<GrayImage, 5> augment(const GrayImage& img) {
  GrayImage r90 = rotate90(img);
  GrayImage r180 = rotate90(r90);
  GrayImage r270 = rotate90(r180);
  return {img, std::move(r90), std::move(r180), std::move(r270), flip_horizontal(img)};
}

template <typename T>
Tensor<T> normalize(const GrayImage& img) {
  Tensor<T> t({1, img.height, img.width});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    t[i] = static_cast<T>(static_cast<double>(img.pixels[i]) / 255.0);
  }
  return t;
}

template Tensor<float> normalize(const GrayImage&);
template Tensor<double> normalize(const GrayImage&);

GrayImage preprocess(const GrayImage& img, const PreprocessOptions& opts) {
  GrayImage out = opts.denoise ? median_filter_3x3(img) : img;
  if (opts.enhance) out = highpass_enhance(out);
  return resize(out, opts.height, opts.width);
}

}  // namespace tdcnn
