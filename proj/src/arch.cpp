#include "tdcnn/arch.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "tdcnn/error.hpp"

namespace tdcnn {

std::vector<std::size_t> hidden_sizes(HiddenArch arch) {
  switch (arch) {
    case HiddenArch::Triangular:
      return {256, 512, 256, 128, 64, 32, 16};
    case HiddenArch::Rectangular:
      return {256, 256, 256, 256, 256, 256};
    case HiddenArch::RectoTriangular:
      return {512, 256, 128, 128, 256, 512};
  }
  throw InvalidArgument("unknown hidden architecture");
}

std::string_view arch_name(HiddenArch arch) {
  switch (arch) {
    case HiddenArch::Triangular:
      return "triangular";
    case HiddenArch::Rectangular:
      return "rectangular";
    case HiddenArch::RectoTriangular:
      return "recto-triangular";
  }
  throw InvalidArgument("unknown hidden architecture");
}

std::string arch_label(HiddenArch arch) {
  std::string s(arch_name(arch));
  for (auto& ch : s)
    if (ch == '-') ch = '_';
  return s;
}

HiddenArch parse_arch(std::string_view text) {
  for (HiddenArch a : kAllArchs) {
    if (text == arch_name(a) || text == arch_label(a)) return a;
  }
  throw InvalidArgument("unknown architecture '" + std::string(text) +
                        "' (expected triangular, rectangular or recto-triangular)");
}

ModelSpec ModelSpec::for_arch(HiddenArch arch, std::size_t height, std::size_t width) {
  ModelSpec s;
  s.arch = arch;
  s.hidden = hidden_sizes(arch);
  s.input_height = height;
  s.input_width = width;
  return s;
}

std::array<std::size_t, kConvStages> ModelSpec::pooled_extents(std::size_t extent) {
  std::array<std::size_t, kConvStages> out{};
  for (std::size_t i = 0; i < kConvStages; ++i) {
    extent /= 2;
    out[i] = extent;
  }
  return out;
}

std::size_t ModelSpec::flatten_width() const {
  return conv_filters.back() * pooled_extents(input_height).back() * pooled_extents(input_width).back();
}

void ModelSpec::validate() const {
  const auto hs = pooled_extents(input_height);
  const auto ws = pooled_extents(input_width);
  for (std::size_t i = 0; i < kConvStages; ++i) {
    if (hs[i] == 0 || ws[i] == 0) {
      throw InvalidArgument("input " + std::to_string(input_height) + "x" + std::to_string(input_width) +
                            " is too small: pooling stage " + std::to_string(i + 1) +
                            " would produce an empty feature map");
    }
  }
  for (std::size_t i = 0; i < kConvStages; ++i) {
    if (conv_filters[i] == 0) throw InvalidArgument("conv stage " + std::to_string(i + 1) + " has no filters");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw InvalidArgument("hidden layer widths must be >= 1");
  }
  if (head_width == 0) throw InvalidArgument("dense head width must be >= 1");
  if (num_classes < 2) throw InvalidArgument("need at least 2 classes");
}

namespace {

std::string join(const auto& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(values[i]);
  }
  return s;
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError("model spec field '" + std::string(key) + "' is not an integer: " + std::string(v));
  }
  return out;
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = v.find(',', start);
    out.push_back(parse_size(key, v.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string ModelSpec::to_text() const {
  std::ostringstream os;
  os << "input_height=" << input_height << '\n'
     << "input_width=" << input_width << '\n'
     << "conv_filters=" << join(conv_filters) << '\n'
     << "arch=" << arch_name(arch) << '\n'
     << "hidden=" << join(hidden) << '\n'
     << "head_width=" << head_width << '\n'
     << "num_classes=" << num_classes << '\n';
  return os.str();
}

ModelSpec ModelSpec::from_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("model spec line without '=': " + std::string(line));
    fields[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw DataError(std::string("model spec is missing '") + key + "'");
    return it->second;
  };
  ModelSpec s;
  s.input_height = parse_size("input_height", get("input_height"));
  s.input_width = parse_size("input_width", get("input_width"));
  const auto filters = parse_list("conv_filters", get("conv_filters"));
  if (filters.size() != kConvStages) throw DataError("model spec needs exactly 5 conv filter counts");
  std::copy(filters.begin(), filters.end(), s.conv_filters.begin());
  try {
    s.arch = parse_arch(get("arch"));
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  s.hidden = parse_list("hidden", get("hidden"));
  s.head_width = parse_size("head_width", get("head_width"));
  s.num_classes = parse_size("num_classes", get("num_classes"));
  return s;
}

}  // namespace tdcnn
