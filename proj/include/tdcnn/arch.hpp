#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tdcnn {

/// Widths of the fully connected stack between flatten and the dense head.
enum class HiddenArch {
  Triangular,       // 256, 512, 256, 128, 64, 32, 16
  Rectangular,      // 256 × 6
  RectoTriangular,  // 512, 256, 128, 128, 256, 512
};

std::vector<std::size_t> hidden_sizes(HiddenArch arch);

/// "triangular", "rectangular", "recto-triangular".
std::string_view arch_name(HiddenArch arch);
/// Identifier form used in CSV rows: "recto_triangular".
std::string arch_label(HiddenArch arch);
/// Accepts either the name or the label spelling.
HiddenArch parse_arch(std::string_view text);

inline constexpr std::array<HiddenArch, 3> kAllArchs = {
    HiddenArch::Triangular, HiddenArch::Rectangular, HiddenArch::RectoTriangular};

inline constexpr std::size_t kConvStages = 5;

/// Declarative network description:
///   5 × (conv3×3 → ReLU → maxpool2×2) → flatten → hidden (ReLU each)
///   → dense head_width + ReLU → dense num_classes → softmax.
struct ModelSpec {
  std::size_t input_height = 300;
  std::size_t input_width = 300;
  std::array<std::size_t, kConvStages> conv_filters{16, 32, 64, 64, 128};
  HiddenArch arch = HiddenArch::RectoTriangular;
  std::vector<std::size_t> hidden = hidden_sizes(HiddenArch::RectoTriangular);
  std::size_t head_width = 64;
  std::size_t num_classes = 2;

  static ModelSpec for_arch(HiddenArch arch, std::size_t height = 300, std::size_t width = 300);

  /// Spatial extent after each pooling stage, e.g. 300 → {150, 75, 37, 18, 9}.
  static std::array<std::size_t, kConvStages> pooled_extents(std::size_t extent);

  std::size_t flatten_width() const;

  /// Throws InvalidArgument naming the first stage that would pool to zero.
  void validate() const;

  /// key=value lines, one per field.
  std::string to_text() const;
  static ModelSpec from_text(std::string_view text);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

}  // namespace tdcnn
