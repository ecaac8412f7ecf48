#include "moraldial/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

#ifndef MORALDIAL_VERSION
#define MORALDIAL_VERSION "0.0.0"
#endif

namespace moraldial {

using nlohmann::json;

std::string_view tool_version() { return MORALDIAL_VERSION; }

void RunManifest::add_input(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw InputError("input not found: " + path.string());
  inputs.push_back({path.string(), text::sha256_file_hex(path.string())});
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                     tm.tm_hour, tm.tm_min, tm.tm_sec);
}

void to_json(json& j, const RunManifest& m) {
  json inputs = json::array();
  for (const auto& i : m.inputs) inputs.push_back({{"path", i.path}, {"sha256", i.sha256}});
  j = json{{"command", m.command},           {"arguments", m.arguments},     {"config", m.config},
           {"seed", m.seed},                 {"inputs", std::move(inputs)},  {"tool_version", m.tool_version},
           {"started_at", m.started_at},     {"finished_at", m.finished_at}};
}

void from_json(const json& j, RunManifest& m) {
  m.command = j.at("command").get<std::string>();
  m.arguments = j.value("arguments", std::vector<std::string>{});
  m.config = j.value("config", json::object());
  m.seed = j.value("seed", std::uint64_t{0});
  m.inputs.clear();
  for (const auto& i : j.value("inputs", json::array())) {
    m.inputs.push_back({i.at("path").get<std::string>(), i.at("sha256").get<std::string>()});
  }
  m.tool_version = j.value("tool_version", "");
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << json(m).dump(2) << '\n';
}

}  // namespace moraldial
