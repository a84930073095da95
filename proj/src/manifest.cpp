#include "tdcnn/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tdcnn {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

int parse_label(std::string_view token) {
  if (token == "0" || token == "healthy") return kHealthy;
  if (token == "1" || token == "tumor") return kTumor;
  throw DataError("unknown label '" + std::string(token) + "'");
}

std::string_view label_name(int label) { return label == kTumor ? "tumor" : "healthy"; }

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest " + path.string());
  const auto base = path.parent_path();

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw DataError(path.string() + ": empty manifest (missing header)");
  ++line_no;
  const auto header = split_csv(line);
  std::ptrdiff_t col_path = -1, col_label = -1, col_subject = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = trim(header[i]);
    if (name == "path") col_path = static_cast<std::ptrdiff_t>(i);
    if (name == "label") col_label = static_cast<std::ptrdiff_t>(i);
    if (name == "subject_id") col_subject = static_cast<std::ptrdiff_t>(i);
  }
  for (auto [col, name] : {std::pair{col_path, "path"}, {col_label, "label"}, {col_subject, "subject_id"}}) {
    if (col < 0) fail(path, 1, std::string("missing column '") + name + "'");
  }

  Manifest m;
  m.source = path.string();
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      fail(path, line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    Sample s;
    const auto rel = trim(fields[static_cast<std::size_t>(col_path)]);
    if (rel.empty()) fail(path, line_no, "empty path");
    s.path = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base / rel;
    try {
      s.label = parse_label(trim(fields[static_cast<std::size_t>(col_label)]));
    } catch (const DataError& e) {
      fail(path, line_no, e.what());
    }
    s.subject_id = trim(fields[static_cast<std::size_t>(col_subject)]);
    if (s.subject_id.empty()) fail(path, line_no, "empty subject_id");
    const auto key = s.path.lexically_normal().string();
    if (!seen.insert(key).second) fail(path, line_no, "duplicate path " + rel);
    if (!std::ifstream(s.path, std::ios::binary)) fail(path, line_no, "cannot read referenced file " + s.path.string());
    m.samples.push_back(std::move(s));
  }
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  const auto base = path.parent_path();
  os << "path,label,subject_id\n";
  for (const auto& s : manifest.samples) {
    auto p = s.path;
    if (!base.empty()) {
      const auto rel = s.path.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    os << p.generic_string() << ',' << label_name(s.label) << ',' << s.subject_id << '\n';
  }
  if (!os) throw DataError("failed writing " + path.string());
}

}  // namespace tdcnn
