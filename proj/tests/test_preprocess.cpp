#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"
#include "tdcnn/preprocess.hpp"

using namespace tdcnn;

namespace {

GrayImage random_image(SeededRng& rng, std::size_t h, std::size_t w) {
  GrayImage img(h, w);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_index(256));
  return img;
}

// Copies each replicate-padded window, sorts it, takes element 4.
GrayImage median_oracle(const GrayImage& img) {
  const std::size_t H = img.height, W = img.width;
  std::vector<std::uint8_t> pad((H + 2) * (W + 2));
  for (std::size_t r = 0; r < H + 2; ++r)
    for (std::size_t c = 0; c < W + 2; ++c) {
      const std::size_t sr = r == 0 ? 0 : std::min(r - 1, H - 1);
      const std::size_t sc = c == 0 ? 0 : std::min(c - 1, W - 1);
      pad[r * (W + 2) + c] = img.pixels[sr * W + sc];
    }
  GrayImage out(H, W);
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t c = 0; c < W; ++c) {
      std::vector<std::uint8_t> win;
      for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t v = 0; v < 3; ++v) win.push_back(pad[(r + u) * (W + 2) + c + v]);
      std::sort(win.begin(), win.end());
      out.pixels[r * W + c] = win[4];
    }
  return out;
}

// Explicit signed convolution with the 4-neighbor Laplacian, then a
// saturating add.
GrayImage highpass_oracle(const GrayImage& img) {
  const auto H = static_cast<long>(img.height), W = static_cast<long>(img.width);
  auto px = [&](long r, long c) {
    r = std::clamp(r, 0L, H - 1);
    c = std::clamp(c, 0L, W - 1);
    return static_cast<long>(img.pixels[static_cast<std::size_t>(r * W + c)]);
  };
  const long k[3][3] = {{0, -1, 0}, {-1, 4, -1}, {0, -1, 0}};
  std::vector<long> edges(img.pixels.size());
  for (long r = 0; r < H; ++r)
    for (long c = 0; c < W; ++c) {
      long s = 0;
      for (long u = -1; u <= 1; ++u)
        for (long v = -1; v <= 1; ++v) s += k[u + 1][v + 1] * px(r + u, c + v);
      edges[static_cast<std::size_t>(r * W + c)] = s;
    }
  GrayImage out(img.height, img.width);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(static_cast<long>(img.pixels[i]) + edges[i], 0L, 255L));
  }
  return out;
}

}  // namespace

TEST_CASE("grayscale conversion") {
  ColorImage c{1, 4, 3, {7, 7, 7, 0, 0, 0, 255, 255, 255, 255, 0, 0}};
  const auto g = to_grayscale(c);
  CHECK(g.pixels == std::vector<std::uint8_t>{7, 0, 255, 76});
  for (int v = 0; v < 256; ++v) {
    const auto b = static_cast<std::uint8_t>(v);
    CHECK(to_grayscale(ColorImage{1, 1, 3, {b, b, b}}).pixels[0] == b);
  }
  ColorImage one{1, 2, 1, {9, 200}};
  CHECK(to_grayscale(one).pixels == one.pixels);
  CHECK_THROWS_AS(to_grayscale(ColorImage{1, 1, 4, {1, 2, 3, 4}}), InvalidArgument);
}

TEST_CASE("median filter examples") {
  const GrayImage flat(5, 7, 99);
  CHECK(median_filter_3x3(flat) == flat);

  GrayImage nine(3, 3, std::vector<std::uint8_t>{5, 0, 8, 3, 7, 1, 6, 2, 4});
  CHECK(median_filter_3x3(nine).at(1, 1) == 4);

  const GrayImage single(1, 1, 42);
  CHECK(median_filter_3x3(single) == single);
}

TEST_CASE("median filter equals the sort-based window oracle") {
  SeededRng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const auto img = random_image(rng, 1 + rng.uniform_index(12), 1 + rng.uniform_index(12));
    const auto out = median_filter_3x3(img);
    CHECK(out == median_oracle(img));
    const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    for (auto p : out.pixels) {
      CHECK(p >= *lo);
      CHECK(p <= *hi);
    }
  }
}

TEST_CASE("high-pass enhancement examples") {
  const GrayImage flat(4, 4, 120);
  CHECK(highpass_enhance(flat) == flat);

  GrayImage dot(5, 5, 0);
  dot.at(2, 2) = 64;
  CHECK(laplacian_edges(dot)[2 * 5 + 2] == 256);
  CHECK(highpass_enhance(dot).at(2, 2) == 255);
  dot.at(2, 2) = 50;
  CHECK(highpass_enhance(dot).at(2, 2) == 250);
  CHECK(highpass_enhance(dot).at(1, 2) == 0);

  CHECK_THROWS_AS(highpass_enhance(GrayImage(2, 5)), InvalidArgument);
}

TEST_CASE("high-pass enhancement equals the two-pass oracle") {
  SeededRng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto img = random_image(rng, 3 + rng.uniform_index(10), 3 + rng.uniform_index(10));
    CHECK(highpass_enhance(img) == highpass_oracle(img));
  }
}

TEST_CASE("resize") {
  SeededRng rng(3);
  const auto img = random_image(rng, 9, 13);
  CHECK(resize(img, 9, 13) == img);
  CHECK(resize(GrayImage(5, 5, 33), 17, 3) == GrayImage(17, 3, 33));

  const GrayImage col(2, 1, std::vector<std::uint8_t>{0, 255});
  const auto up = resize(col, 4, 1);
  // corner-aligned: sources 0, 1/3, 2/3, 1
  const std::vector<int> expected{0, 85, 170, 255};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(static_cast<int>(up.pixels[i]) - expected[i]) <= 1);

  const auto down = resize(img, 1, 1);
  CHECK(down.pixels[0] == img.pixels[0]);
  CHECK_THROWS_AS(resize(img, 0, 3), InvalidArgument);
}

TEST_CASE("augmentation algebra") {
  const GrayImage sq(2, 2, std::vector<std::uint8_t>{'a', 'b', 'c', 'd'});
  const auto aug = augment(sq);
  CHECK(aug[0] == sq);
  CHECK(aug[1] == GrayImage(2, 2, std::vector<std::uint8_t>{'b', 'd', 'a', 'c'}));
  CHECK(aug[4] == GrayImage(2, 2, std::vector<std::uint8_t>{'b', 'a', 'd', 'c'}));

  SeededRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(rng, 1 + rng.uniform_index(9), 1 + rng.uniform_index(9));
    CHECK(rotate90(rotate90(rotate90(rotate90(img)))) == img);
    CHECK(flip_horizontal(flip_horizontal(img)) == img);
    const auto all = augment(img);
    CHECK(all[2] == rotate90(rotate90(img)));
    CHECK(all[3] == rotate90(all[2]));
    CHECK(all[1].height == img.width);
    auto sorted = img.pixels;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& a : all) {
      auto s = a.pixels;
      std::sort(s.begin(), s.end());
      CHECK(s == sorted);
    }
  }
}

TEST_CASE("normalize") {
  CHECK(normalize<double>(GrayImage(2, 3, 0)) == Tensor<double>({1, 2, 3}));
  CHECK(normalize<double>(GrayImage(2, 3, 255)) == Tensor<double>({1, 2, 3}, 1.0));
  const auto t = normalize<double>(GrayImage(1, 1, 128));
  CHECK(t[0] == 128.0 / 255.0);
  CHECK(std::abs(t[0] - 0.50196) < 1e-5);
}

TEST_CASE("full pipeline is deterministic") {
  SeededRng rng(5);
  const auto img = random_image(rng, 40, 50);
  const PreprocessOptions opts{64, 64, true, true};
  const auto a = normalize<float>(preprocess(img, opts));
  const auto b = normalize<float>(preprocess(img, opts));
  CHECK(a == b);
  CHECK(a.shape() == Shape{1, 64, 64});
}
