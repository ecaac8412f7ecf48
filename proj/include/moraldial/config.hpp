#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "moraldial/orchestrator.hpp"

namespace moraldial {

inline constexpr std::string_view kEnvPrefix = "MORALDIAL_";

/// Settings shared by the evaluation commands.
///
/// Endpoints take an http(s) URL or an offline scheme: "mock:<file>[,<file>...]"
/// for the scorer and the foundation classifier, "hashing:<dim>" for the
/// embedder and "script:<file>" for chatbots.
struct EvalConfig {
  std::size_t k = 5;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;
  std::string scorer_url;
  std::string embedder_url = "hashing:256";
  std::string chatbot_url;
  std::string chatbot_b_url;
  std::string foundations_url;
  long timeout_ms = 30000;
  int retries = 3;
  double failure_rate_ceiling = 0.2;
  std::size_t concurrency = 1;
  RilContext ril_context = RilContext::model;
  int consensus_floor = 4;
};

using Settings = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment. Unknown keys are rejected.
Settings parse_config_file(const std::filesystem::path& path);

/// MORALDIAL_<KEY> variables of the current process, keyed by lower-case key.
Settings environment_settings();

/// Applies defaults, then the file, then the environment, then flags.
/// Throws ConfigError naming the key and its source on an unknown key, an
/// unparseable value or a value out of range.
EvalConfig load_config(const std::optional<std::filesystem::path>& file, const Settings& env, const Settings& flags);

/// Applies one setting; ConfigError on an unknown key or bad value.
void apply_setting(EvalConfig& config, const std::string& key, const std::string& value, const std::string& origin);
void validate_config(const EvalConfig& config);

nlohmann::json to_json_snapshot(const EvalConfig& config);

}  // namespace moraldial
