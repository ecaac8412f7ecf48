#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "moraldial/agreement.hpp"
#include "moraldial/embedding.hpp"
#include "moraldial/types.hpp"

namespace moraldial {

struct SafetyCriteria {
  int mic_severity = 5;
  int mic_consensus = 5;
  int social_chem_consensus = 5;
  // highest level of the (magnitude) pressure scale in the Social-Chem schema
  int social_chem_pressure = 2;
};

/// MIC RoTs with the worst violation severity and universal consensus, plus
/// Social-Chem RoTs with universal consensus under maximal cultural pressure.
/// Exact duplicate statements are kept once (first occurrence, MIC first).
std::vector<RoTRecord> select_safety_rots(const std::vector<RoTRecord>& mic, const std::vector<RoTRecord>& social_chem,
                                          const SafetyCriteria& criteria = {});

/// Statement used to index a safety RoT (judgment + action, no situation).
std::string safety_statement(const RoTRecord& r);

struct SafetyEntry {
  std::string rot_id;
  std::string text;
  Embedding vector;

  friend bool operator==(const SafetyEntry&, const SafetyEntry&) = default;
};

struct Retrieved {
  std::string rot_id;
  std::string text;
  double similarity = 0;
};

/// Immutable index of unit-length safety RoT embeddings searched by exhaustive
/// dot-product scan. Concurrent reads are safe.
class SafetyRoTIndex {
 public:
  SafetyRoTIndex() = default;

  /// Normalizes vectors; InputError on dimension mismatch or duplicate ids.
  static SafetyRoTIndex from_entries(std::vector<SafetyEntry> entries);
  static SafetyRoTIndex build(const std::vector<RoTRecord>& rots, Embedder& embedder, std::size_t batch_size = 64);

  /// JSONL lines of {"rot_id", "text", "vector"}.
  static SafetyRoTIndex load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<SafetyEntry>& entries() const { return entries_; }

  /// The min(k, size) entries with the highest cosine similarity to `query`,
  /// descending, ties broken by ascending rot_id.
  std::vector<Retrieved> search(std::span<const float> query, std::size_t k) const;

 private:
  std::vector<SafetyEntry> entries_;
  std::size_t dimension_ = 0;
};

/// Embeds the query and searches. k > size returns every entry with a warning.
std::vector<Retrieved> retrieve_topk(const SafetyRoTIndex& index, const std::string& query_text, Embedder& embedder,
                                     std::size_t k);

struct SafetyScore {
  double s_ma = 0;
  std::vector<Retrieved> retrieved;
  std::vector<double> agreement;  // AS(Q, A, R_i) per retrieved RoT
};

/// Minimum of the per-RoT agreement values; InputError when empty.
double min_agreement(std::span<const double> values);

/// Retrieves the top-k safety RoTs for the answer text and returns the lowest
/// agreement of the answer with any of them.
SafetyScore safety_score(const std::string& question, const std::string& answer, const SafetyRoTIndex& index,
                         Embedder& embedder, AgreementScorer& scorer, std::size_t k);

}  // namespace moraldial
