#include "tdcnn/pgm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace tdcnn {

namespace {

// Reads one unsigned decimal header token, skipping whitespace and comments.
std::size_t header_number(std::span<const std::uint8_t> b, std::size_t& pos, const char* what) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= b.size()) throw PgmError(PgmError::Kind::Truncated, std::string("PGM header ends before ") + what);
  if (!std::isdigit(b[pos])) throw PgmError(PgmError::Kind::BadHeader, std::string("PGM header: bad ") + what);
  std::size_t v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + static_cast<std::size_t>(b[pos] - '0');
    if (v > (1u << 30)) throw PgmError(PgmError::Kind::BadHeader, std::string("PGM header: ") + what + " too large");
    ++pos;
  }
  return v;
}

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> b) {
  if (b.size() < 2) throw PgmError(PgmError::Kind::Truncated, "file too short for a PGM header");
  if (b[0] != 'P' || b[1] != '5') {
    throw PgmError(PgmError::Kind::WrongFormat,
                   "wrong format: expected binary PGM magic P5, found '" + std::string(b.begin(), b.begin() + 2) + "'");
  }
  std::size_t pos = 2;
  const std::size_t width = header_number(b, pos, "width");
  const std::size_t height = header_number(b, pos, "height");
  const std::size_t maxval = header_number(b, pos, "maxval");
  if (width == 0 || height == 0) throw PgmError(PgmError::Kind::BadHeader, "PGM has zero extent");
  if (maxval != 255) {
    throw PgmError(PgmError::Kind::BadMaxval, "PGM maxval " + std::to_string(maxval) + " unsupported (need 255)");
  }
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw PgmError(PgmError::Kind::Truncated, "PGM header not terminated before the payload");
  }
  ++pos;
  const std::size_t need = width * height;
  if (b.size() - pos < need) {
    throw PgmError(PgmError::Kind::Truncated, "PGM payload truncated: " + std::to_string(b.size() - pos) + " of " +
                                                  std::to_string(need) + " bytes");
  }
  return GrayImage(height, width, std::vector<std::uint8_t>(b.begin() + pos, b.begin() + pos + need));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PgmError(PgmError::Kind::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(is), {});
  try {
    return decode_pgm(bytes);
  } catch (const PgmError& e) {
    throw PgmError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw PgmError(PgmError::Kind::Io, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw PgmError(PgmError::Kind::Io, "failed writing " + path.string());
}

}  // namespace tdcnn
