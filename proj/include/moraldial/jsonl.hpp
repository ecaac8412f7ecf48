#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "moraldial/error.hpp"

namespace moraldial::jsonl {

/// Reads every non-blank line of a JSONL file as a json value.
std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

template <typename T>
std::vector<T> read(const std::filesystem::path& path) {
  std::vector<T> out;
  for (const auto& j : read_all(path)) out.push_back(j.get<T>());
  return out;
}

template <typename Range>
void write(const std::filesystem::path& path, const Range& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

}  // namespace moraldial::jsonl
