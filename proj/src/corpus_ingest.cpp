#include "moraldial/corpus_ingest.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "moraldial/delimited.hpp"
#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

namespace {

const std::map<std::string, int> kConsensusScale = {
    {"nobody", 1}, {"rare", 2}, {"controversial", 3}, {"most", 4}, {"all", 5}};
const std::map<std::string, int> kSeverityScale = {
    {"fine", 1}, {"unwise", 2}, {"bad", 3}, {"horrible", 4}, {"worst", 5}};

std::optional<int> parse_int(std::string_view raw) {
  const std::string s = text::trim(raw);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<int> parse_ordinal(std::string_view raw, const std::map<std::string, int>& labels) {
  const std::string key = text::to_lower(text::trim(raw));
  if (auto it = labels.find(key); it != labels.end()) return it->second;
  return parse_int(key);
}

std::map<std::string, std::string> lowered(const std::map<std::string, std::string>& m) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : m) out[text::to_lower(k)] = v;
  return out;
}

std::map<std::string, int> lowered(const std::map<std::string, int>& m) {
  std::map<std::string, int> out;
  for (const auto& [k, v] : m) out[text::to_lower(k)] = v;
  return out;
}

/// Column lookup helper bound to one table and schema.
class RowReader {
 public:
  RowReader(const DelimitedTable& table, const ColumnMap& schema) : table_(table), schema_(schema) {}

  int require(const std::string& field) const {
    int idx = find(field);
    if (idx < 0) {
      auto col = schema_.column_for(field).value_or(field);
      throw ConfigError("required column '" + col + "' (field '" + field + "') missing from header");
    }
    return idx;
  }

  int find(const std::string& field) const {
    auto col = schema_.column_for(field);
    return col ? table_.column(*col) : -1;
  }

  static std::string get(const DelimitedRow& row, int idx) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= row.fields.size()) return {};
    return text::trim(row.fields[static_cast<std::size_t>(idx)]);
  }

 private:
  const DelimitedTable& table_;
  const ColumnMap& schema_;
};

std::optional<std::string> nonempty(std::string s) {
  if (s.empty()) return std::nullopt;
  return s;
}

bool is_modal(std::string_view word) {
  static const std::array<std::string_view, 10> kModals = {
      "should", "shouldn't", "shouldnt", "must", "mustn't", "can't", "cannot", "ought", "shall", "shan't"};
  const std::string w = text::to_lower(word);
  for (auto m : kModals) {
    if (w == m) return true;
  }
  return false;
}

}  // namespace

ColumnMap ColumnMap::mic_default() {
  ColumnMap m;
  m.delimiter = ',';
  m.columns = {{"id", "id"},
               {"question", "Q"},
               {"answer", "A"},
               {"rot", "rot"},
               {"rot_id", "rot-id"},
               {"revised_answer", "revised_answer"},
               {"alignment", "A_agrees"},
               {"consensus", "rot-agree"},
               {"severity", "violation-severity"},
               {"foundations", "moral"},
               {"split", "split"}};
  m.alignment_labels = {{"0", "disagree"}, {"1", "neutral"}, {"2", "agree"}};
  m.consensus_labels = kConsensusScale;
  m.severity_labels = kSeverityScale;
  return m;
}

ColumnMap ColumnMap::social_chem_default() {
  ColumnMap m;
  m.delimiter = '\t';
  m.columns = {{"id", "rot-id"},
               {"judgment", "rot-judgment"},
               {"action", "action"},
               {"situation", "situation"},
               {"consensus", "rot-agree"},
               {"pressure", "action-pressure"},
               {"foundations", "rot-moral-foundations"}};
  // Social-Chem 101 stores rot-agree as 0..4; canonical records use 1..5.
  m.consensus_labels = {{"0", 1}, {"1", 2}, {"2", 3}, {"3", 4}, {"4", 5}};
  return m;
}

ColumnMap ColumnMap::from_json(const json& j, ColumnMap base) {
  try {
    if (j.contains("delimiter")) {
      auto d = j["delimiter"].get<std::string>();
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) throw ConfigError("delimiter must be a single character");
      base.delimiter = d[0];
    }
    if (j.contains("columns")) {
      for (const auto& [k, v] : j["columns"].items()) base.columns[k] = v.get<std::string>();
    }
    if (j.contains("alignment_labels")) base.alignment_labels = j["alignment_labels"].get<std::map<std::string, std::string>>();
    if (j.contains("consensus_labels")) base.consensus_labels = j["consensus_labels"].get<std::map<std::string, int>>();
    if (j.contains("severity_labels")) base.severity_labels = j["severity_labels"].get<std::map<std::string, int>>();
    if (j.contains("split_labels")) base.split_labels = j["split_labels"].get<std::map<std::string, std::string>>();
    if (j.contains("pressure_magnitude")) base.pressure_magnitude = j["pressure_magnitude"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid column map: ") + e.what());
  }
  return base;
}

ColumnMap ColumnMap::load(const std::filesystem::path& path, ColumnMap base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open column map " + path.string());
  try {
    return from_json(json::parse(in), std::move(base));
  } catch (const json::parse_error& e) {
    throw ConfigError("column map " + path.string() + ": " + e.what());
  }
}

std::optional<std::string> ColumnMap::column_for(const std::string& field) const {
  auto it = columns.find(field);
  if (it == columns.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

void to_json(json& j, const Rejection& r) {
  j = json{{"source", r.source}, {"line", r.line}, {"reasons", r.reasons}};
}

std::pair<std::string, std::string> split_rot_text(std::string_view rot) {
  const std::string body = text::strip_terminal_punctuation(rot);
  const auto words = text::split_any(body, " ");
  if (words.size() >= 3 && is_modal(words[1])) {
    std::size_t take = 2;
    if (text::iequals(words[2], "not") && words.size() >= 4) take = 3;
    std::string judgment = words[0];
    for (std::size_t i = 1; i < take; ++i) judgment += " " + words[i];
    std::string action;
    for (std::size_t i = take; i < words.size(); ++i) action += (action.empty() ? "" : " ") + words[i];
    return {judgment, action};
  }
  if (auto pos = body.find(" to "); pos != std::string::npos && pos > 0) {
    return {body.substr(0, pos), body.substr(pos + 1)};
  }
  if (words.size() >= 3) {
    std::string action;
    for (std::size_t i = 2; i < words.size(); ++i) action += (action.empty() ? "" : " ") + words[i];
    return {words[0] + " " + words[1], action};
  }
  if (words.size() == 2) return {words[0], words[1]};
  return {body, ""};
}

std::string rot_id_for_text(std::string_view rot) {
  const std::string norm = text::to_lower(text::strip_terminal_punctuation(rot));
  return "rot-" + text::sha256_hex(norm).substr(0, 16);
}

ValidationResult validate_record(const RoTRecord& r) {
  ValidationResult v;
  if (r.consensus < 1 || r.consensus > 5) v.violations.emplace_back("consensus out of range");
  if (r.severity && (*r.severity < 1 || *r.severity > 5)) v.violations.emplace_back("severity out of range");
  if (r.source == Source::mic && !r.severity) v.violations.emplace_back("severity missing");
  if (text::trim(r.judgment).empty()) v.violations.emplace_back("judgment is empty");
  if (text::trim(r.action).empty()) v.violations.emplace_back("action is empty");
  if (r.source == Source::mic && r.foundations.empty()) v.violations.emplace_back("foundations empty for mic record");
  return v;
}

ValidationResult validate_record(const MetaSample& s) {
  ValidationResult v;
  if (text::trim(s.question).empty()) v.violations.emplace_back("question is empty");
  if (text::trim(s.answer).empty()) v.violations.emplace_back("answer is empty");
  auto rot = validate_record(s.rot);
  v.violations.insert(v.violations.end(), rot.violations.begin(), rot.violations.end());
  return v;
}

IngestResult<MetaSample> load_meta_samples(const std::filesystem::path& path, const ColumnMap& schema) {
  const auto table = read_delimited(path, schema.delimiter);
  RowReader reader(table, schema);
  if (table.header.empty()) throw ConfigError(path.string() + ": missing header row");

  const int c_question = reader.require("question");
  const int c_answer = reader.require("answer");
  const int c_alignment = reader.require("alignment");
  const int c_consensus = reader.require("consensus");
  const int c_severity = reader.require("severity");
  const int c_foundations = reader.require("foundations");
  const int c_split = reader.require("split");
  const int c_rot = reader.find("rot");
  const int c_judgment = reader.find("judgment");
  const int c_action = reader.find("action");
  if (c_rot < 0 && (c_judgment < 0 || c_action < 0)) {
    throw ConfigError("column map must provide 'rot' or both 'judgment' and 'action' columns present in " +
                      path.string());
  }
  const int c_id = reader.find("id");
  const int c_rot_id = reader.find("rot_id");
  const int c_revised = reader.find("revised_answer");

  const auto alignment_labels = lowered(schema.alignment_labels);
  const auto split_labels = lowered(schema.split_labels);
  const auto consensus_labels = lowered(schema.consensus_labels);
  const auto severity_labels = lowered(schema.severity_labels);

  IngestResult<MetaSample> result;
  for (const auto& row : table.rows) {
    std::vector<std::string> reasons;
    if (row.fields.size() != table.header.size()) {
      reasons.push_back("row has " + std::to_string(row.fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    auto get = [&](int idx) { return RowReader::get(row, idx); };

    MetaSample s;
    s.id = c_id >= 0 && !get(c_id).empty() ? get(c_id) : "mic-" + std::to_string(row.line);
    s.question = get(c_question);
    s.answer = get(c_answer);
    s.revised_answer = nonempty(get(c_revised));

    auto& rot = s.rot;
    rot.source = Source::mic;
    std::string rot_text;
    if (c_rot >= 0) {
      rot_text = get(c_rot);
      std::tie(rot.judgment, rot.action) = split_rot_text(rot_text);
    } else {
      rot.judgment = get(c_judgment);
      rot.action = text::strip_terminal_punctuation(get(c_action));
      rot_text = rot.judgment + " " + rot.action;
    }
    rot.id = c_rot_id >= 0 && !get(c_rot_id).empty() ? get(c_rot_id) : rot_id_for_text(rot_text);

    const std::string raw_alignment = get(c_alignment);
    std::string alignment_text = raw_alignment;
    if (auto it = alignment_labels.find(text::to_lower(raw_alignment)); it != alignment_labels.end()) {
      alignment_text = it->second;
    }
    if (auto a = parse_alignment(alignment_text)) {
      s.alignment = *a;
    } else {
      reasons.push_back("unparseable alignment '" + raw_alignment + "'");
    }

    bool consensus_parsed = false;
    if (auto c = parse_ordinal(get(c_consensus), consensus_labels)) {
      rot.consensus = *c;
      consensus_parsed = true;
    } else {
      reasons.push_back("unparseable consensus '" + get(c_consensus) + "'");
    }
    if (auto sev = parse_ordinal(get(c_severity), severity_labels)) {
      rot.severity = *sev;
    } else {
      reasons.push_back("unparseable severity '" + get(c_severity) + "'");
    }

    for (const auto& token : text::split_any(get(c_foundations), "|,;")) {
      if (auto f = parse_foundation(token)) {
        rot.foundations.insert(*f);
      } else {
        reasons.push_back("unknown foundation '" + token + "'");
      }
    }

    const std::string raw_split = get(c_split);
    std::string split_text = raw_split;
    if (auto it = split_labels.find(text::to_lower(raw_split)); it != split_labels.end()) split_text = it->second;
    if (auto sp = parse_split(split_text)) {
      s.split = *sp;
    } else {
      reasons.push_back("unparseable split '" + raw_split + "'");
    }

    // Only report invariant violations for fields that parsed; a field that
    // failed to parse already carries its own reason.
    for (auto& violation : validate_record(s).violations) {
      const bool masked = (violation == "consensus out of range" && !consensus_parsed) ||
                          (violation == "severity missing" && !rot.severity);
      if (!masked) reasons.push_back(std::move(violation));
    }

    if (reasons.empty()) {
      result.records.push_back(std::move(s));
    } else {
      result.rejections.push_back({path.string(), row.line, std::move(reasons)});
    }
  }
  return result;
}

IngestResult<RoTRecord> load_socialchem_rots(const std::filesystem::path& path, const ColumnMap& schema) {
  const auto table = read_delimited(path, schema.delimiter);
  RowReader reader(table, schema);
  if (table.header.empty()) throw ConfigError(path.string() + ": missing header row");

  const int c_judgment = reader.require("judgment");
  const int c_action = reader.require("action");
  const int c_consensus = reader.require("consensus");
  const int c_pressure = reader.require("pressure");
  const int c_situation = reader.find("situation");
  const int c_id = reader.find("id");
  const int c_foundations = reader.find("foundations");
  const auto consensus_labels = lowered(schema.consensus_labels);

  IngestResult<RoTRecord> result;
  for (const auto& row : table.rows) {
    std::vector<std::string> reasons;
    if (row.fields.size() != table.header.size()) {
      reasons.push_back("row has " + std::to_string(row.fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    auto get = [&](int idx) { return RowReader::get(row, idx); };

    RoTRecord r;
    r.source = Source::social_chem;
    r.id = c_id >= 0 && !get(c_id).empty() ? get(c_id) : "sc-" + std::to_string(row.line);
    r.judgment = get(c_judgment);
    r.action = text::strip_terminal_punctuation(get(c_action));
    r.situation = nonempty(text::strip_terminal_punctuation(get(c_situation)));

    bool consensus_parsed = false;
    if (auto c = parse_ordinal(get(c_consensus), consensus_labels)) {
      r.consensus = *c;
      consensus_parsed = true;
    } else {
      reasons.push_back("unparseable consensus '" + get(c_consensus) + "'");
    }
    const std::string raw_pressure = get(c_pressure);
    if (auto p = parse_int(raw_pressure)) {
      r.pressure = schema.pressure_magnitude ? std::abs(*p) : *p;
    } else {
      reasons.push_back("unparseable pressure '" + raw_pressure + "'");
    }
    for (const auto& token : text::split_any(get(c_foundations), "|,;")) {
      if (auto f = parse_foundation(token)) r.foundations.insert(*f);
    }

    for (auto& violation : validate_record(r).violations) {
      if (!(violation == "consensus out of range" && !consensus_parsed)) reasons.push_back(std::move(violation));
    }

    if (reasons.empty()) {
      result.records.push_back(std::move(r));
    } else {
      result.rejections.push_back({path.string(), row.line, std::move(reasons)});
    }
  }
  return result;
}

void append_rejections(const std::filesystem::path& path, const std::vector<Rejection>& rejections) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : rejections) out << json(r).dump() << '\n';
}

}  // namespace moraldial
