#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zeno_harness/config.hpp"

namespace zeno::harness {

struct Summary {
  Json json;
  std::string text;
  std::vector<std::string> warnings;
};

/// Merges every envelope in `dir` (summary.json excluded) in file-name order.
/// Throws ConfigError when the directory holds no envelope.
Summary build_summary(const std::filesystem::path& dir);

/// Writes summary.json and summary.txt next to the envelopes.
std::vector<std::filesystem::path> write_summary(const std::filesystem::path& dir, const Summary& summary);

}  // namespace zeno::harness
