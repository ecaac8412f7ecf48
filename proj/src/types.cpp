#include "moraldial/types.hpp"

#include <bit>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

std::string_view to_string(Foundation f) {
  switch (f) {
    case Foundation::care: return "care";
    case Foundation::liberty: return "liberty";
    case Foundation::loyalty: return "loyalty";
    case Foundation::fairness: return "fairness";
    case Foundation::sanctity: return "sanctity";
    case Foundation::authority: return "authority";
  }
  return "?";
}

std::optional<Foundation> parse_foundation(std::string_view raw) {
  std::string name = text::to_lower(text::trim(raw));
  if (auto dash = name.find('-'); dash != std::string::npos) name.resize(dash);
  for (auto f : kAllFoundations) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

std::size_t FoundationSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Foundation> FoundationSet::members() const {
  std::vector<Foundation> out;
  for (auto f : kAllFoundations) {
    if (contains(f)) out.push_back(f);
  }
  return out;
}

std::string_view to_string(Alignment a) {
  switch (a) {
    case Alignment::agree: return "agree";
    case Alignment::neutral: return "neutral";
    case Alignment::disagree: return "disagree";
  }
  return "?";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

std::string_view to_string(Source s) { return s == Source::mic ? "mic" : "social_chem"; }

std::optional<Alignment> parse_alignment(std::string_view raw) {
  const std::string v = text::to_lower(text::trim(raw));
  if (v == "agree") return Alignment::agree;
  if (v == "neutral") return Alignment::neutral;
  if (v == "disagree") return Alignment::disagree;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view raw) {
  const std::string v = text::to_lower(text::trim(raw));
  if (v == "train") return Split::train;
  if (v == "dev" || v == "val" || v == "valid" || v == "validation") return Split::dev;
  if (v == "test") return Split::test;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view raw) {
  const std::string v = text::to_lower(text::trim(raw));
  if (v == "mic") return Source::mic;
  if (v == "social_chem") return Source::social_chem;
  return std::nullopt;
}

namespace {

template <typename E, typename Parser>
E enum_field(const json& j, const char* key, Parser parse) {
  const auto& raw = j.at(key).get_ref<const std::string&>();
  auto parsed = parse(raw);
  if (!parsed) throw InputError(std::string("invalid ") + key + " '" + raw + "'");
  return *parsed;
}

}  // namespace

void to_json(json& j, const FoundationSet& fs) {
  j = json::array();
  for (auto f : fs.members()) j.push_back(std::string(to_string(f)));
}

void from_json(const json& j, FoundationSet& fs) {
  fs = {};
  for (const auto& item : j) {
    auto f = parse_foundation(item.get<std::string>());
    if (!f) throw InputError("unknown foundation '" + item.get<std::string>() + "'");
    fs.insert(*f);
  }
}

void to_json(json& j, const RoTRecord& r) {
  j = json{{"id", r.id},
           {"judgment", r.judgment},
           {"action", r.action},
           {"consensus", r.consensus},
           {"foundations", r.foundations},
           {"source", to_string(r.source)}};
  if (r.situation) j["situation"] = *r.situation;
  if (r.severity) j["severity"] = *r.severity;
  if (r.pressure) j["pressure"] = *r.pressure;
}

void from_json(const json& j, RoTRecord& r) {
  r = {};
  r.id = j.at("id").get<std::string>();
  r.judgment = j.at("judgment").get<std::string>();
  r.action = j.at("action").get<std::string>();
  r.consensus = j.at("consensus").get<int>();
  r.foundations = j.value("foundations", FoundationSet{});
  r.source = enum_field<Source>(j, "source", parse_source);
  if (j.contains("situation")) r.situation = j["situation"].get<std::string>();
  if (j.contains("severity")) r.severity = j["severity"].get<int>();
  if (j.contains("pressure")) r.pressure = j["pressure"].get<int>();
}

void to_json(json& j, const MetaSample& s) {
  j = json{{"id", s.id},
           {"question", s.question},
           {"answer", s.answer},
           {"rot", s.rot},
           {"alignment", to_string(s.alignment)},
           {"split", to_string(s.split)}};
  if (s.revised_answer) j["revised_answer"] = *s.revised_answer;
}

void from_json(const json& j, MetaSample& s) {
  s = {};
  s.id = j.at("id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.rot = j.at("rot").get<RoTRecord>();
  s.alignment = enum_field<Alignment>(j, "alignment", parse_alignment);
  s.split = enum_field<Split>(j, "split", parse_split);
  if (j.contains("revised_answer")) s.revised_answer = j["revised_answer"].get<std::string>();
}

}  // namespace moraldial
