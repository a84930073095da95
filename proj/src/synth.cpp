#include "tdcnn/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "tdcnn/pgm.hpp"
#include "tdcnn/rng.hpp"

namespace tdcnn {

double SynthConfig::brain_radius() const {
  return 0.4 * static_cast<double>(std::min(height, width));
}

void SynthConfig::validate() const {
  if (height < 8 || width < 8) throw InvalidArgument("synthetic images must be at least 8x8");
  if (!(noise_stddev >= 0.0)) throw InvalidArgument("noise stddev must be >= 0");
  if (!(radius_min > 0.0) || radius_max < radius_min) {
    throw InvalidArgument("tumor radii need 0 < radius_min <= radius_max");
  }
  if (radius_max >= 0.9 * brain_radius() - 1.0) {
    throw InvalidArgument("tumor radius_max " + std::to_string(radius_max) + " does not fit inside the " +
                          std::to_string(height) + "x" + std::to_string(width) + " brain disc");
  }
  if (subject_block == 0) throw InvalidArgument("subject block size must be >= 1");
}

GrayImage synth_image(const SynthConfig& cfg, int label, std::uint64_t image_seed) {
  SeededRng rng(image_seed);
  const double H = static_cast<double>(cfg.height), W = static_cast<double>(cfg.width);
  const double cy = H / 2.0 + rng.uniform(-2.0, 2.0);
  const double cx = W / 2.0 + rng.uniform(-2.0, 2.0);
  const double R = cfg.brain_radius() * rng.uniform(0.9, 1.0);

  // Ellipse: center within the disc, semi-axes a, b, rotation theta.
  double ty = 0, tx = 0, a = 1, b = 1, cos_t = 1, sin_t = 0;
  const bool tumor = label == kTumor;
  if (tumor) {
    const double reach = std::max(0.0, R - cfg.radius_max - 1.0);
    const double rho = reach * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    ty = cy + rho * std::sin(phi);
    tx = cx + rho * std::cos(phi);
    a = rng.uniform(cfg.radius_min, cfg.radius_max);
    b = rng.uniform(cfg.radius_min, cfg.radius_max);
    const double theta = std::numbers::pi * rng.uniform();
    cos_t = std::cos(theta);
    sin_t = std::sin(theta);
  }

  GrayImage img(cfg.height, cfg.width);
  for (std::size_t r = 0; r < cfg.height; ++r) {
    for (std::size_t c = 0; c < cfg.width; ++c) {
      const double y = static_cast<double>(r) + 0.5, x = static_cast<double>(c) + 0.5;
      const double d2 = ((y - cy) * (y - cy) + (x - cx) * (x - cx)) / (R * R);
      double v = d2 <= 1.0 ? 90.0 + 50.0 * (1.0 - d2) : 10.0;
      if (tumor) {
        const double u = ((x - tx) * cos_t + (y - ty) * sin_t) / a;
        const double w = (-(x - tx) * sin_t + (y - ty) * cos_t) / b;
        if (u * u + w * w <= 1.0) v += cfg.tumor_delta;
      }
      v += rng.normal(0.0, cfg.noise_stddev);
      img.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

Manifest generate_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  std::vector<int> labels(cfg.healthy, kHealthy);
  labels.insert(labels.end(), cfg.tumor, kTumor);
  SeededRng rng(cfg.seed);
  rng.shuffle(labels);

  Manifest m;
  m.source = "synthetic seed=" + std::to_string(cfg.seed);
  char name[32];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(name, sizeof name, "img_%05zu.pgm", i);
    const auto file = out_dir / name;
    write_pgm(synth_image(cfg, labels[i], cfg.seed ^ static_cast<std::uint64_t>(i)), file);
    std::snprintf(name, sizeof name, "s%04zu", i / cfg.subject_block);
    m.samples.push_back({file, labels[i], name});
  }
  write_manifest(m, out_dir / "manifest.csv");
  return m;
}

}  // namespace tdcnn
