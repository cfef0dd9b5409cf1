#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace zeno::harness {

using Json = nlohmann::json;

inline constexpr const char* kArtifactName = "zenolab";
inline constexpr const char* kArtifactVersion = "0.1.0";
/// Bumped whenever a CSV column is added.
inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { spectrum, zeno_run, short_time, leakage, reduce, algebra_check };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Invalid configuration; `pointer` is a JSON pointer to the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string pointer) : std::runtime_error(what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectrum;
  Json raw;  // validated, with defaults filled in
  std::string hash;
  std::filesystem::path output;
  int jobs = 1;
  bool dat = false;
  std::uint64_t seed = 12345;
};

/// Checks keys and types against the schema of the experiment kind, fills
/// defaults and computes the config hash. Unknown keys are rejected.
ExperimentConfig parse_config(Json j);

Json load_json(const std::filesystem::path& path);

/// FNV-1a 64 over the canonical dump, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Hash over everything that affects results (output, jobs and dat excluded).
std::string config_hash(const Json& config);

/// Output directory: explicit value, else $ZENO_OUT, else ./zeno-out.
std::filesystem::path default_output_dir();

/// Converts a dotted core field name ("domain.r1", "t") to a JSON pointer.
std::string field_pointer(const std::string& field);

/// Parses "a:b" (every integer), "a:b:s" (step s) or "a:b:x2" (geometric).
std::vector<int> parse_int_ladder(const Json& value, const std::string& pointer);
/// Parses an array of numbers or "log:lo:hi:count".
std::vector<double> parse_real_ladder(const Json& value, const std::string& pointer);

}  // namespace zeno::harness
