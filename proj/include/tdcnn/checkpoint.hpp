#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "tdcnn/model.hpp"

namespace tdcnn {

// Binary layout, little-endian throughout:
//   magic "TDCNNCK1" (8 bytes) | version u8
//   | metadata length u32 | metadata: ModelSpec::to_text() + "precision=32|64\n"
//   | seed u64
//   | per parameter, in Model::parameters() order:
//       name length u16, name bytes, rank u8, extents u32 × rank,
//       payload f32 (precision 32) or f64 (precision 64)

inline constexpr char kCheckpointMagic[8] = {'T', 'D', 'C', 'N', 'N', 'C', 'K', '1'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

class CheckpointError : public DataError {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, Malformed };

  CheckpointError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path);

using AnyModel = std::variant<Model<float>, Model<double>>;

/// Loads at whatever precision the file was written with.
AnyModel load_checkpoint(const std::filesystem::path& path);

/// Loads and converts to precision T when the file differs.
template <typename T>
Model<T> load_checkpoint_as(const std::filesystem::path& path);

}  // namespace tdcnn
