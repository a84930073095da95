#pragma once

#include <span>
#include <string>
#include <vector>

#include "tdcnn/manifest.hpp"
#include "tdcnn/preprocess.hpp"
#include "tdcnn/tensor.hpp"

namespace tdcnn {

/// Preprocessed images kept as 8-bit pixels; normalization happens per batch.
struct LabeledSet {
  std::vector<GrayImage> images;
  std::vector<int> labels;
  std::vector<std::string> subjects;

  std::size_t size() const noexcept { return images.size(); }
  bool empty() const noexcept { return images.empty(); }

  void push_back(GrayImage img, int label, std::string subject);
  LabeledSet subset(std::span<const std::size_t> indices) const;
};

/// Reads every manifest image and runs it through `preprocess`.
LabeledSet load_dataset(const Manifest& manifest, const PreprocessOptions& opts);

/// Each image followed by its rot90/rot180/rot270/flip variants (5× size).
LabeledSet augment_set(const LabeledSet& set);

/// Normalized N×1×H×W batch of the selected images.
template <typename T>
Tensor<T> make_batch(const LabeledSet& set, std::span<const std::size_t> indices);

/// Seeded split into (train, holdout) with round(n·fraction) held out,
/// never taking every sample.
std::pair<LabeledSet, LabeledSet> holdout_split(const LabeledSet& set, double fraction, std::uint64_t seed);

}  // namespace tdcnn
