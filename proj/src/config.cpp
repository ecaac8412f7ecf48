#include "moraldial/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

extern char** environ;

namespace moraldial {

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "k",          "lambda",          "seed",       "scorer_url",          "embedder_url",
      "chatbot_url", "chatbot_b_url",  "foundations_url", "timeout_ms",     "retries",
      "failure_rate_ceiling", "concurrency", "ril_context", "consensus_floor"};
  return keys;
}

bool is_known(const std::string& key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& origin,
                            const std::string& expected) {
  throw ConfigError(fmt::format("invalid value '{}' for '{}' ({}): expected {}", value, key, origin, expected));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value, const std::string& origin) {
  const std::string v = text::trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, value, origin, "an integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value, const std::string& origin) {
  const std::string v = text::trim(value);
  if (v.empty()) bad_value(key, value, origin, "a number");
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(out)) bad_value(key, value, origin, "a number");
  return out;
}

}  // namespace

Settings parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Settings out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), n));
    const std::string key = text::to_lower(text::trim(t.substr(0, eq)));
    if (!is_known(key)) throw ConfigError(fmt::format("{}:{}: unknown key '{}'", path.string(), n, key));
    out[key] = text::trim(t.substr(eq + 1));
  }
  return out;
}

Settings environment_settings() {
  Settings out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (entry.substr(0, kEnvPrefix.size()) != kEnvPrefix) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string key = text::to_lower(entry.substr(kEnvPrefix.size(), eq - kEnvPrefix.size()));
    if (is_known(key)) out[key] = std::string(entry.substr(eq + 1));
  }
  return out;
}

void apply_setting(EvalConfig& c, const std::string& key, const std::string& value, const std::string& origin) {
  if (key == "k") {
    const auto v = parse_integer<long long>(key, value, origin);
    if (v < 1) bad_value(key, value, origin, "an integer >= 1");
    c.k = static_cast<std::size_t>(v);
  } else if (key == "lambda") {
    c.lambda = parse_double(key, value, origin);
    if (c.lambda <= -1.0 || c.lambda >= 1.0) bad_value(key, value, origin, "a number in (-1, 1)");
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value, origin);
  } else if (key == "scorer_url") {
    c.scorer_url = text::trim(value);
  } else if (key == "embedder_url") {
    c.embedder_url = text::trim(value);
  } else if (key == "chatbot_url") {
    c.chatbot_url = text::trim(value);
  } else if (key == "chatbot_b_url") {
    c.chatbot_b_url = text::trim(value);
  } else if (key == "foundations_url") {
    c.foundations_url = text::trim(value);
  } else if (key == "timeout_ms") {
    c.timeout_ms = parse_integer<long>(key, value, origin);
    if (c.timeout_ms < 1) bad_value(key, value, origin, "a positive integer");
  } else if (key == "retries") {
    c.retries = parse_integer<int>(key, value, origin);
    if (c.retries < 1) bad_value(key, value, origin, "an integer >= 1");
  } else if (key == "failure_rate_ceiling") {
    c.failure_rate_ceiling = parse_double(key, value, origin);
    if (c.failure_rate_ceiling < 0.0 || c.failure_rate_ceiling > 1.0) bad_value(key, value, origin, "a number in [0, 1]");
  } else if (key == "concurrency") {
    const auto v = parse_integer<long long>(key, value, origin);
    if (v < 1) bad_value(key, value, origin, "an integer >= 1");
    c.concurrency = static_cast<std::size_t>(v);
  } else if (key == "ril_context") {
    auto v = parse_ril_context(text::trim(value));
    if (!v) bad_value(key, value, origin, "gold or model");
    c.ril_context = *v;
  } else if (key == "consensus_floor") {
    c.consensus_floor = parse_integer<int>(key, value, origin);
    if (c.consensus_floor < 1 || c.consensus_floor > 5) bad_value(key, value, origin, "an integer in [1, 5]");
  } else {
    throw ConfigError(fmt::format("unknown config key '{}' ({})", key, origin));
  }
}

void validate_config(const EvalConfig& c) {
  if (c.k < 1) throw ConfigError("'k' must be >= 1");
  if (!(c.lambda > -1.0 && c.lambda < 1.0)) throw ConfigError("'lambda' must be in (-1, 1)");
  if (c.concurrency < 1) throw ConfigError("'concurrency' must be >= 1");
}

EvalConfig load_config(const std::optional<std::filesystem::path>& file, const Settings& env, const Settings& flags) {
  EvalConfig c;
  if (file) {
    for (const auto& [k, v] : parse_config_file(*file)) apply_setting(c, k, v, file->string());
  }
  for (const auto& [k, v] : env) {
    apply_setting(c, k, v, "environment variable " + std::string(kEnvPrefix) + text::to_upper(k));
  }
  for (const auto& [k, v] : flags) apply_setting(c, k, v, "flag --" + k);
  validate_config(c);
  return c;
}

nlohmann::json to_json_snapshot(const EvalConfig& c) {
  return nlohmann::json{{"k", c.k},
                        {"lambda", c.lambda},
                        {"seed", c.seed},
                        {"scorer_url", c.scorer_url},
                        {"embedder_url", c.embedder_url},
                        {"chatbot_url", c.chatbot_url},
                        {"chatbot_b_url", c.chatbot_b_url},
                        {"foundations_url", c.foundations_url},
                        {"timeout_ms", c.timeout_ms},
                        {"retries", c.retries},
                        {"failure_rate_ceiling", c.failure_rate_ceiling},
                        {"concurrency", c.concurrency},
                        {"ril_context", to_string(c.ril_context)},
                        {"consensus_floor", c.consensus_floor}};
}

}  // namespace moraldial
