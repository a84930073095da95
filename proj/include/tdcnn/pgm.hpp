#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tdcnn/image.hpp"

namespace tdcnn {

class PgmError : public DataError {
 public:
  enum class Kind { Io, WrongFormat, BadMaxval, Truncated, BadHeader };

  PgmError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Binary PGM ("P5", maxval 255). Header tokens may be separated by any
/// whitespace and '#' comments; exactly one whitespace byte precedes the payload.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
/// "P5\n<w> <h>\n255\n" followed by the pixels.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace tdcnn
