#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace moraldial {

/// One logical record of a delimiter-separated file; `line` is the 1-based
/// physical line on which the record starts.
struct DelimitedRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<DelimitedRow> rows;

  /// Column position by header name, or -1.
  int column(const std::string& name) const;
};

/// Parses RFC 4180 style text: quoted fields may contain the delimiter,
/// doubled quotes and newlines. Blank lines are skipped.
DelimitedTable parse_delimited(const std::string& content, char delimiter);
DelimitedTable read_delimited(const std::filesystem::path& path, char delimiter);

}  // namespace moraldial
