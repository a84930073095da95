#include "tdcnn/folds.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "tdcnn/error.hpp"
#include "tdcnn/rng.hpp"

namespace tdcnn {

std::string_view fold_mode_name(FoldMode mode) { return mode == FoldMode::Random ? "random" : "subject"; }

FoldMode parse_fold_mode(std::string_view text) {
  if (text == "random") return FoldMode::Random;
  if (text == "subject" || text == "subject-wise") return FoldMode::SubjectWise;
  throw InvalidArgument("unknown cross-validation mode '" + std::string(text) + "' (expected random or subject)");
}

std::size_t FoldPlan::sample_count() const {
  std::size_t n = 0;
  for (const auto& f : folds) n += f.size();
  return n;
}

std::vector<std::size_t> FoldPlan::training_indices(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != i) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan split_kfold(std::span<const std::string> subjects, std::size_t k, FoldMode mode, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  FoldPlan plan;
  plan.k = k;
  plan.mode = mode;
  plan.folds.resize(k);
  SeededRng rng(seed);

  if (mode == FoldMode::Random) {
    if (subjects.size() < k) {
      throw InvalidArgument("random " + std::to_string(k) + "-fold split needs at least " + std::to_string(k) +
                            " samples, got " + std::to_string(subjects.size()));
    }
    std::vector<std::size_t> order(subjects.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) plan.folds[i % k].push_back(order[i]);
  } else {
    std::map<std::string_view, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < subjects.size(); ++i) by_subject[subjects[i]].push_back(i);
    if (by_subject.size() < k) {
      throw InvalidArgument("subject-wise " + std::to_string(k) + "-fold split needs at least " + std::to_string(k) +
                            " subjects, got " + std::to_string(by_subject.size()));
    }
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [id, idx] : by_subject) groups.push_back(std::move(idx));
    // Shuffle first so equal-sized subjects land in seed-dependent folds.
    rng.shuffle(groups);
    std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    for (auto& g : groups) {
      auto smallest = std::min_element(plan.folds.begin(), plan.folds.end(),
                                       [](const auto& a, const auto& b) { return a.size() < b.size(); });
      smallest->insert(smallest->end(), g.begin(), g.end());
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

}  // namespace tdcnn
