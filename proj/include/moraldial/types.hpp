#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace moraldial {

enum class Foundation : std::uint8_t { care, liberty, loyalty, fairness, sanctity, authority };

inline constexpr std::array<Foundation, 6> kAllFoundations = {
    Foundation::care,     Foundation::liberty,  Foundation::loyalty,
    Foundation::fairness, Foundation::sanctity, Foundation::authority};

std::string_view to_string(Foundation f);
/// Accepts plain names ("care") and MIC-style pairs ("care-harm"), case-insensitive.
std::optional<Foundation> parse_foundation(std::string_view text);

class FoundationSet {
 public:
  FoundationSet() = default;
  FoundationSet(std::initializer_list<Foundation> fs) {
    for (auto f : fs) insert(f);
  }

  void insert(Foundation f) { bits_ |= mask(f); }
  bool contains(Foundation f) const { return (bits_ & mask(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<Foundation> members() const;

  friend bool operator==(FoundationSet, FoundationSet) = default;

 private:
  static std::uint8_t mask(Foundation f) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(f));
  }
  std::uint8_t bits_ = 0;
};

enum class Alignment { agree, neutral, disagree };
enum class Split { train, dev, test };
enum class Source { mic, social_chem };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::dev, Split::test};

std::string_view to_string(Alignment a);
std::string_view to_string(Split s);
std::string_view to_string(Source s);
std::optional<Alignment> parse_alignment(std::string_view text);
std::optional<Split> parse_split(std::string_view text);
std::optional<Source> parse_source(std::string_view text);

struct RoTRecord {
  std::string id;
  std::string judgment;
  std::string action;
  std::optional<std::string> situation;
  int consensus = 0;
  // MIC only: 1 (fine) .. 5 (worst).
  std::optional<int> severity;
  // Social-Chem only: magnitude of cultural pressure on the action.
  std::optional<int> pressure;
  FoundationSet foundations;
  Source source = Source::mic;

  friend bool operator==(const RoTRecord&, const RoTRecord&) = default;
};

struct MetaSample {
  std::string id;
  std::string question;
  std::string answer;
  RoTRecord rot;
  std::optional<std::string> revised_answer;
  Alignment alignment = Alignment::neutral;
  Split split = Split::train;

  friend bool operator==(const MetaSample&, const MetaSample&) = default;
};

void to_json(nlohmann::json& j, const FoundationSet& fs);
void from_json(const nlohmann::json& j, FoundationSet& fs);
void to_json(nlohmann::json& j, const RoTRecord& r);
void from_json(const nlohmann::json& j, RoTRecord& r);
void to_json(nlohmann::json& j, const MetaSample& s);
void from_json(const nlohmann::json& j, MetaSample& s);

}  // namespace moraldial
