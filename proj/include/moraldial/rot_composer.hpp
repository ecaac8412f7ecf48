#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moraldial/random.hpp"
#include "moraldial/types.hpp"

namespace moraldial {

inline constexpr std::array<std::string_view, 3> kWhenConjunctions = {"when", "if", "given that"};

enum class ClauseOrder { judgment_first, situation_first };

/// A statement-format RoT: "{Judgment} {Action} {when-conj} {Situation}."
/// The structured parts are kept alongside the rendered text so variations
/// can re-render without re-parsing.
struct RoTStatement {
  std::string text;
  std::string source_id;
  bool has_situation = false;
  ClauseOrder clause_order = ClauseOrder::judgment_first;

  std::string judgment;
  std::string action;
  std::string situation;
  std::string conjunction;

  friend bool operator==(const RoTStatement&, const RoTStatement&) = default;
};

RoTStatement compose_statement(const RoTRecord& r, std::string_view conjunction = "when");

/// Re-renders `text` from the structured parts.
std::string render_statement(const RoTStatement& s);

std::string_view pick_conjunction(Rng& rng);

struct VariationOptions {
  double p_drop = 0.5;
  double p_swap = 0.5;
};

/// Randomly drops the situation and/or moves it in front of the main clause.
/// Always consumes exactly two draws so that downstream draws stay aligned.
RoTStatement vary_statement(const RoTStatement& s, Rng& rng, const VariationOptions& options = {});

struct ParsedStatement {
  std::string main_clause;  // judgment + " " + action
  std::optional<std::string> situation;
  std::optional<std::string> conjunction;
  ClauseOrder clause_order = ClauseOrder::judgment_first;
};

/// Inverse of render_statement for statements whose situation contains no
/// comma and whose action contains no when-conjunction token.
ParsedStatement parse_statement(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct PretrainCorpus {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
  std::vector<std::string> train_ids;
  std::vector<std::string> dev_ids;
  std::vector<std::string> test_ids;
  std::size_t duplicates_removed = 0;
};

/// Composes and varies one statement per record, removes exact duplicate
/// statements, shuffles with `seed` and cuts the splits.
PretrainCorpus emit_pretrain_corpus(const std::vector<RoTRecord>& records, std::uint64_t seed,
                                    const SplitRatios& ratios = {}, const VariationOptions& variation = {});

/// Writes pretrain.{train,dev,test}.txt into `dir`.
void write_pretrain_corpus(const std::filesystem::path& dir, const PretrainCorpus& corpus);

}  // namespace moraldial
