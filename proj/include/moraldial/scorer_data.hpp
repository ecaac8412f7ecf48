#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "moraldial/types.hpp"

namespace moraldial {

enum class Provenance { annotated, irrelevant_answer, nonsense_explanation };

std::string_view to_string(Provenance p);

struct ScorerExample {
  std::string question;
  std::string answer;
  std::string rot;
  Alignment label = Alignment::neutral;
  Provenance provenance = Provenance::annotated;
  Split split = Split::train;
  std::string source_id;
};

void to_json(nlohmann::json& j, const ScorerExample& e);

/// Precomputed paraphrases (e.g. back-translations), keyed by source text.
class ParaphraseSource {
 public:
  ParaphraseSource() = default;
  explicit ParaphraseSource(std::unordered_map<std::string, std::string> pairs) : pairs_(std::move(pairs)) {}

  /// Reads JSONL lines of {"text": ..., "paraphrase": ...}.
  static ParaphraseSource load(const std::filesystem::path& path);

  std::optional<std::string> lookup(const std::string& text) const;
  std::size_t size() const { return pairs_.size(); }

 private:
  std::unordered_map<std::string, std::string> pairs_;
};

struct ScorerDatasetOptions {
  std::uint64_t seed = 0;
  // synthetic irrelevant-answer examples per annotated example
  std::size_t irrelevant_per_annotated = 1;
  // one nonsense-explanation example per this many annotated examples
  std::size_t annotated_per_nonsense = 10;
};

struct ScorerDataset {
  std::map<Split, std::vector<ScorerExample>> examples;
  std::map<std::string, std::map<std::string, std::size_t>> label_counts;  // split -> label -> count
  std::vector<std::string> warnings;
};

void to_json(nlohmann::json& j, const ScorerDataset& d);

/// Annotated (Q, A, R) triples keep their alignment label. Each answer is also
/// paired with the RoT of a random same-split sample with a different RoT, and
/// a fraction of answers are paired with their own paraphrase posing as a RoT;
/// both synthetic kinds are labeled neutral. Without paraphrases only the
/// irrelevant-answer augmentation is produced.
ScorerDataset build_scorer_dataset(std::vector<MetaSample> samples, const ScorerDatasetOptions& options,
                                   const ParaphraseSource* paraphrases);

/// Writes scorer.{train,dev,test}.jsonl and scorer_stats.json.
void write_scorer_dataset(const std::filesystem::path& dir, const ScorerDataset& dataset);

}  // namespace moraldial
