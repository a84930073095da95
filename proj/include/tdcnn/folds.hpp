#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdcnn {

enum class FoldMode {
  Random,       // shuffled samples dealt round-robin
  SubjectWise,  // whole subjects, largest first, into the currently smallest fold
};

std::string_view fold_mode_name(FoldMode mode);
FoldMode parse_fold_mode(std::string_view text);  // "random" | "subject"

struct FoldPlan {
  std::size_t k = 10;
  FoldMode mode = FoldMode::Random;
  std::vector<std::vector<std::size_t>> folds;  // sample indices, ascending within a fold

  std::size_t sample_count() const;
  /// Indices outside fold i, ascending.
  std::vector<std::size_t> training_indices(std::size_t i) const;
};

/// `subjects` has one entry per sample. Deterministic given `seed`.
/// Random needs at least k samples; SubjectWise at least k distinct subjects.
FoldPlan split_kfold(std::span<const std::string> subjects, std::size_t k, FoldMode mode, std::uint64_t seed);

}  // namespace tdcnn
