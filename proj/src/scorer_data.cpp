#include "moraldial/scorer_data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "moraldial/error.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/random.hpp"
#include "moraldial/rot_composer.hpp"

namespace moraldial {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::annotated: return "annotated";
    case Provenance::irrelevant_answer: return "irrelevant_answer";
    case Provenance::nonsense_explanation: return "nonsense_explanation";
  }
  return "?";
}

void to_json(json& j, const ScorerExample& e) {
  j = json{{"question", e.question},   {"answer", e.answer},
           {"rot", e.rot},             {"label", to_string(e.label)},
           {"provenance", to_string(e.provenance)}, {"split", to_string(e.split)},
           {"source_id", e.source_id}};
}

void to_json(json& j, const ScorerDataset& d) {
  j = json{{"label_counts", d.label_counts}, {"warnings", d.warnings}};
}

ParaphraseSource ParaphraseSource::load(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> pairs;
  for (const auto& j : jsonl::read_all(path)) {
    pairs[j.at("text").get<std::string>()] = j.at("paraphrase").get<std::string>();
  }
  return ParaphraseSource(std::move(pairs));
}

std::optional<std::string> ParaphraseSource::lookup(const std::string& text) const {
  if (auto it = pairs_.find(text); it != pairs_.end()) return it->second;
  return std::nullopt;
}

ScorerDataset build_scorer_dataset(std::vector<MetaSample> samples, const ScorerDatasetOptions& options,
                                   const ParaphraseSource* paraphrases) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  ScorerDataset dataset;
  if (paraphrases == nullptr || paraphrases->size() == 0) {
    dataset.warnings.emplace_back("paraphrase source unavailable; nonsense-explanation augmentation skipped");
    spdlog::warn("{}", dataset.warnings.back());
  }

  for (auto split : kAllSplits) {
    std::vector<const MetaSample*> pool;
    for (const auto& s : samples) {
      if (s.split == split) pool.push_back(&s);
    }
    auto& out = dataset.examples[split];

    for (const auto* s : pool) {
      out.push_back({s->question, s->answer, compose_statement(s->rot).text, s->alignment, Provenance::annotated,
                     split, s->id});
    }

    for (const auto* s : pool) {
      Rng rng(options.seed, s->id + "/irrelevant");
      for (std::size_t k = 0; k < options.irrelevant_per_annotated; ++k) {
        // rejection sampling; a split where every sample shares one RoT yields nothing
        const MetaSample* other = nullptr;
        for (int attempt = 0; attempt < 64 && other == nullptr; ++attempt) {
          const auto* candidate = pool[rng.index(pool.size())];
          if (candidate->rot.id != s->rot.id) other = candidate;
        }
        if (other == nullptr) continue;
        out.push_back({s->question, s->answer, compose_statement(other->rot).text, Alignment::neutral,
                       Provenance::irrelevant_answer, split, s->id + "+" + other->id});
      }
    }

    if (paraphrases != nullptr && paraphrases->size() > 0 && options.annotated_per_nonsense > 0) {
      const std::size_t quota = pool.size() / options.annotated_per_nonsense;
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng(options.seed, "nonsense/" + std::string(to_string(split)));
      rng.shuffle(order);
      std::size_t made = 0;
      for (auto idx : order) {
        if (made >= quota) break;
        const auto* s = pool[idx];
        if (auto para = paraphrases->lookup(s->answer)) {
          out.push_back({s->question, s->answer, *para, Alignment::neutral, Provenance::nonsense_explanation, split,
                         s->id});
          ++made;
        }
      }
      if (made < quota) {
        dataset.warnings.push_back(std::string(to_string(split)) + ": only " + std::to_string(made) + " of " +
                                   std::to_string(quota) + " nonsense-explanation examples had paraphrases");
      }
    }

    auto& counts = dataset.label_counts[std::string(to_string(split))];
    for (auto label : {Alignment::agree, Alignment::neutral, Alignment::disagree}) counts[std::string(to_string(label))] = 0;
    for (const auto& e : out) ++counts[std::string(to_string(e.label))];
  }
  return dataset;
}

void write_scorer_dataset(const std::filesystem::path& dir, const ScorerDataset& dataset) {
  std::filesystem::create_directories(dir);
  for (auto split : kAllSplits) {
    auto it = dataset.examples.find(split);
    const std::vector<ScorerExample> empty;
    jsonl::write(dir / ("scorer." + std::string(to_string(split)) + ".jsonl"),
                 it == dataset.examples.end() ? empty : it->second);
  }
  std::ofstream stats(dir / "scorer_stats.json", std::ios::binary | std::ios::trunc);
  stats << json(dataset).dump(2) << '\n';
}

}  // namespace moraldial
