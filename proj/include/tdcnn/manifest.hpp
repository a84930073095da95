#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdcnn/error.hpp"

namespace tdcnn {

enum Label : int { kHealthy = 0, kTumor = 1 };

struct Sample {
  std::filesystem::path path;  // absolute, or relative to the working directory
  int label = kHealthy;
  std::string subject_id;
};

struct Manifest {
  std::vector<Sample> samples;
  std::vector<std::string> class_names{"healthy", "tumor"};
  std::string source;
};

/// Parses "0", "1", "healthy" or "tumor".
int parse_label(std::string_view token);
std::string_view label_name(int label);

/// CSV with header `path,label,subject_id` (columns in any order). Relative
/// paths resolve against the manifest's directory and every referenced file
/// must be readable. Errors carry the offending line number.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes the CSV; sample paths are stored relative to the manifest directory
/// when they live below it.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace tdcnn
