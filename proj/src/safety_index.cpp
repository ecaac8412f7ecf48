#include "moraldial/safety_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "moraldial/error.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/rot_composer.hpp"

namespace moraldial {

using nlohmann::json;

std::string safety_statement(const RoTRecord& r) {
  RoTRecord plain = r;
  plain.situation.reset();
  return compose_statement(plain).text;
}

std::vector<RoTRecord> select_safety_rots(const std::vector<RoTRecord>& mic, const std::vector<RoTRecord>& social_chem,
                                          const SafetyCriteria& criteria) {
  std::vector<RoTRecord> out;
  std::unordered_set<std::string> seen_text;
  std::unordered_set<std::string> seen_id;
  auto keep = [&](const RoTRecord& r) {
    if (!seen_id.insert(r.id).second) return;
    if (seen_text.insert(safety_statement(r)).second) out.push_back(r);
  };
  for (const auto& r : mic) {
    if (r.severity == criteria.mic_severity && r.consensus == criteria.mic_consensus) keep(r);
  }
  for (const auto& r : social_chem) {
    if (r.consensus == criteria.social_chem_consensus && r.pressure == criteria.social_chem_pressure) keep(r);
  }
  return out;
}

SafetyRoTIndex SafetyRoTIndex::from_entries(std::vector<SafetyEntry> entries) {
  SafetyRoTIndex index;
  std::unordered_set<std::string> ids;
  for (auto& e : entries) {
    if (e.vector.empty()) throw InputError("safety entry " + e.rot_id + " has an empty vector");
    if (index.dimension_ == 0) index.dimension_ = e.vector.size();
    if (e.vector.size() != index.dimension_) {
      throw InputError("safety entry " + e.rot_id + " has dimension " + std::to_string(e.vector.size()) + ", expected " +
                       std::to_string(index.dimension_));
    }
    if (!ids.insert(e.rot_id).second) throw InputError("duplicate safety rot_id " + e.rot_id);
    if (std::abs(l2_norm(e.vector) - 1.0) > 1e-6) e.vector = normalize(e.vector);
  }
  index.entries_ = std::move(entries);
  return index;
}

SafetyRoTIndex SafetyRoTIndex::build(const std::vector<RoTRecord>& rots, Embedder& embedder, std::size_t batch_size) {
  if (batch_size == 0) batch_size = 1;
  std::vector<SafetyEntry> entries;
  entries.reserve(rots.size());
  for (std::size_t start = 0; start < rots.size(); start += batch_size) {
    const std::size_t end = std::min(rots.size(), start + batch_size);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(safety_statement(rots[i]));
    auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) {
      throw ProtocolError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                          std::to_string(texts.size()) + " texts");
    }
    for (std::size_t i = start; i < end; ++i) {
      entries.push_back({rots[i].id, std::move(texts[i - start]), std::move(vectors[i - start])});
    }
  }
  return from_entries(std::move(entries));
}

SafetyRoTIndex SafetyRoTIndex::load(const std::filesystem::path& path) {
  std::vector<SafetyEntry> entries;
  for (const auto& j : jsonl::read_all(path)) {
    entries.push_back({j.at("rot_id").get<std::string>(), j.at("text").get<std::string>(),
                       j.at("vector").get<std::vector<float>>()});
  }
  for (const auto& e : entries) {
    if (std::abs(l2_norm(e.vector) - 1.0) > 1e-6) {
      throw InputError(path.string() + ": vector of " + e.rot_id + " is not unit length");
    }
  }
  return from_entries(std::move(entries));
}

void SafetyRoTIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& e : entries_) {
    out << json{{"rot_id", e.rot_id}, {"text", e.text}, {"vector", e.vector}}.dump() << '\n';
  }
}

std::vector<Retrieved> SafetyRoTIndex::search(std::span<const float> query, std::size_t k) const {
  if (query.size() != dimension_) {
    throw InputError("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dimension_));
  }
  const Embedding unit = normalize(query);
  std::vector<double> sims(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) sims[i] = dot(unit, entries_[i].vector);

  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return entries_[a].rot_id < entries_[b].rot_id;
                    });
  std::vector<Retrieved> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& e = entries_[order[i]];
    out.push_back({e.rot_id, e.text, sims[order[i]]});
  }
  return out;
}

std::vector<Retrieved> retrieve_topk(const SafetyRoTIndex& index, const std::string& query_text, Embedder& embedder,
                                     std::size_t k) {
  if (index.empty()) throw InputError("retrieve_topk: index is empty");
  if (k == 0) throw InputError("retrieve_topk: k must be at least 1");
  if (k > index.size()) {
    spdlog::warn("retrieve_topk: k={} exceeds index size {}; returning all entries", k, index.size());
  }
  return index.search(embedder.embed_one(query_text), k);
}

double min_agreement(std::span<const double> values) {
  if (values.empty()) throw InputError("min_agreement: no values");
  return *std::min_element(values.begin(), values.end());
}

SafetyScore safety_score(const std::string& question, const std::string& answer, const SafetyRoTIndex& index,
                         Embedder& embedder, AgreementScorer& scorer, std::size_t k) {
  SafetyScore result;
  try {
    result.retrieved = retrieve_topk(index, answer, embedder, k);
  } catch (const ServiceUnavailable& e) {
    throw ServiceUnavailable(e.service(), std::string("while retrieving safety RoTs: ") + e.what());
  }
  for (const auto& r : result.retrieved) {
    result.agreement.push_back(scorer.score(question, answer, r.text).as_score);
  }
  result.s_ma = min_agreement(result.agreement);
  return result;
}

}  // namespace moraldial
