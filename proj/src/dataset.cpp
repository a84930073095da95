#include "tdcnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdcnn/pgm.hpp"
#include "tdcnn/rng.hpp"

namespace tdcnn {

void LabeledSet::push_back(GrayImage img, int label, std::string subject) {
  images.push_back(std::move(img));
  labels.push_back(label);
  subjects.push_back(std::move(subject));
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
  LabeledSet out;
  for (std::size_t i : indices) out.push_back(images.at(i), labels.at(i), subjects.at(i));
  return out;
}

LabeledSet load_dataset(const Manifest& manifest, const PreprocessOptions& opts) {
  LabeledSet set;
  for (const auto& s : manifest.samples) set.push_back(preprocess(read_pgm(s.path), opts), s.label, s.subject_id);
  return set;
}

LabeledSet augment_set(const LabeledSet& set) {
  LabeledSet out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.images[i].height != set.images[i].width) {
      throw InvalidArgument("augmentation needs square images, got " + std::to_string(set.images[i].height) + "x" +
                            std::to_string(set.images[i].width));
    }
    for (auto& img : augment(set.images[i])) out.push_back(std::move(img), set.labels[i], set.subjects[i]);
  }
  return out;
}

template <typename T>
Tensor<T> make_batch(const LabeledSet& set, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("empty batch");
  const auto& first = set.images.at(indices[0]);
  const std::size_t H = first.height, W = first.width;
  Tensor<T> batch({indices.size(), 1, H, W});
  T* out = batch.data().data();
  for (std::size_t i : indices) {
    const auto& img = set.images.at(i);
    if (img.height != H || img.width != W) throw ShapeError("batch mixes image sizes");
    for (auto px : img.pixels) *out++ = static_cast<T>(static_cast<double>(px) / 255.0);
  }
  return batch;
}

template Tensor<float> make_batch(const LabeledSet&, std::span<const std::size_t>);
template Tensor<double> make_batch(const LabeledSet&, std::span<const std::size_t>);

std::pair<LabeledSet, LabeledSet> holdout_split(const LabeledSet& set, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InvalidArgument("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  SeededRng rng(seed);
  rng.shuffle(order);
  std::size_t held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(set.size())));
  if (set.size() > 0) held = std::min(held, set.size() - 1);
  std::vector<std::size_t> hold(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(hold.begin(), hold.end());
  std::sort(keep.begin(), keep.end());
  return {set.subset(keep), set.subset(hold)};
}

}  // namespace tdcnn
