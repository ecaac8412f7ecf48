#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moraldial/phrases.hpp"
#include "moraldial/random.hpp"
#include "moraldial/types.hpp"

namespace moraldial {

enum class FlowKind { MA, ME, MR, RIL };
enum class Speaker { user, bot };
enum class TurnTag { question, answer, why, rot, revised_answer, new_question, new_answer };

inline constexpr std::array<FlowKind, 4> kAllFlowKinds = {FlowKind::MA, FlowKind::ME, FlowKind::MR, FlowKind::RIL};

std::string_view to_string(FlowKind k);
std::string_view to_string(Speaker s);
std::string_view to_string(TurnTag t);
std::optional<FlowKind> parse_flow_kind(std::string_view s);
std::optional<Speaker> parse_speaker(std::string_view s);
std::optional<TurnTag> parse_turn_tag(std::string_view s);

/// Number of turns every flow of `kind` has.
std::size_t expected_turns(FlowKind kind);
/// Modeling target of `kind` written as a conditional probability.
std::string_view modeling_target(FlowKind kind);

struct Turn {
  Speaker speaker = Speaker::user;
  std::string text;
  TurnTag tag = TurnTag::question;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct DialogueFlow {
  std::string id;
  FlowKind kind = FlowKind::MA;
  std::vector<Turn> turns;
  Split split = Split::train;
  std::vector<std::string> source_sample_ids;
  std::string rot_id;

  /// The response is the last turn; everything before it is context.
  std::size_t response_index() const { return turns.empty() ? 0 : turns.size() - 1; }
};

void to_json(nlohmann::json& j, const Turn& t);
void from_json(const nlohmann::json& j, Turn& t);
void to_json(nlohmann::json& j, const DialogueFlow& f);
void from_json(const nlohmann::json& j, DialogueFlow& f);

/// Structural check: turn count, alternation starting with the user, and the
/// tag expected at each position for the flow kind.
std::vector<std::string> check_flow_shape(const DialogueFlow& flow);

enum class FilterDecision { keep_A, keep_Aprime, both, neither };

std::string_view to_string(FilterDecision d);

/// A is dropped when it violates its RoT; A' is dropped when absent or when
/// the RoT's consensus is below `consensus_floor`.
FilterDecision filter_meta(const MetaSample& s, int consensus_floor);

bool keeps_answer(FilterDecision d);
bool keeps_revised(FilterDecision d);

std::vector<DialogueFlow> build_ma(const MetaSample& s, FilterDecision decision);

/// One flow per distinct why-phrase; `multiplicity` is capped by the class size.
/// Returns an empty vector when A' is missing or filtered.
std::vector<DialogueFlow> build_me(const MetaSample& s, FilterDecision decision, Rng& rng,
                                   std::size_t multiplicity = 1, const PhraseBank& phrases = PhraseBank::standard());

std::optional<DialogueFlow> build_mr(const MetaSample& s, FilterDecision decision, Rng& rng,
                                     const PhraseBank& phrases = PhraseBank::standard());

/// The answer a same-RoT partner contributes as A_new: its revised answer when
/// that survives filtering, else its original answer when that does.
std::optional<std::string> partner_answer(const MetaSample& partner, int consensus_floor);

std::optional<DialogueFlow> build_ril(const DialogueFlow& base, const MetaSample& base_sample,
                                      const MetaSample& paired, int consensus_floor, Rng& rng,
                                      const PhraseBank& phrases = PhraseBank::standard());

struct BuildFlowsOptions {
  std::uint64_t seed = 0;
  int consensus_floor = 4;
  std::size_t me_multiplicity = 1;
};

struct KindStats {
  std::size_t samples = 0;
  std::size_t turns = 0;
  double mean_context_words = 0;
  double mean_response_words = 0;
};

struct FlowStats {
  std::map<std::string, KindStats> kinds;  // MA, ME, MR, RIL, Overall
  std::map<std::string, std::size_t> flows_per_split;
  std::map<std::string, std::size_t> skipped;  // reason -> count
  std::size_t leaked_questions_dropped = 0;
  double rot_overlap_dev = 0;
  double rot_overlap_test = 0;
};

void to_json(nlohmann::json& j, const FlowStats& s);

struct FlowDataset {
  std::map<Split, std::vector<DialogueFlow>> flows;
  FlowStats stats;
};

/// Builds every flow for every sample.
///
/// Samples are processed in id order. Dev/test samples whose question also
/// occurs in train are dropped. RIL pairs the samples sharing a RoT within a
/// split: after sorting by id, sample j's ME and MR flows take sample j+1 as
/// partner.
FlowDataset build_flows(std::vector<MetaSample> samples, const BuildFlowsOptions& options);

/// Writes flows.{train,dev,test}.jsonl and flow_stats.json. Lines of
/// `general_dialogue`, when given, are appended verbatim to the train file.
void write_flow_dataset(const std::filesystem::path& dir, const FlowDataset& dataset,
                        const std::optional<std::filesystem::path>& general_dialogue = std::nullopt);

}  // namespace moraldial
