#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace moraldial {

std::string_view tool_version();

struct InputDigest {
  std::string path;
  std::string sha256;
};

/// Provenance of one command's outputs: what ran, with which settings, on
/// which inputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<InputDigest> inputs;
  std::string tool_version;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;

  /// Hashes `path` and records it.
  void add_input(const std::filesystem::path& path);
};

std::string utc_timestamp();

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

/// Writes `dir`/manifest.json, replacing a previous one.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace moraldial
