#include "moraldial/delimited.hpp"

#include <fstream>
#include <sstream>

#include "moraldial/error.hpp"

namespace moraldial {

int DelimitedTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

DelimitedTable parse_delimited(const std::string& content, char delimiter) {
  std::vector<DelimitedRow> records;
  DelimitedRow current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = DelimitedRow{};
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      // CRLF line endings
    } else if (c == '\n') {
      end_record();
      ++line;
      current.line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw InputError("unterminated quoted field starting near line " + std::to_string(current.line));
  if (!field.empty() || !current.fields.empty()) end_record();

  DelimitedTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front().fields);
  for (auto& h : table.header) {
    // tolerate a UTF-8 byte order mark on the first header cell
    if (h.rfind("\xEF\xBB\xBF", 0) == 0) h.erase(0, 3);
  }
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return table;
}

DelimitedTable read_delimited(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_delimited(ss.str(), delimiter);
}

}  // namespace moraldial
