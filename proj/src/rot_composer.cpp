#include "moraldial/rot_composer.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

namespace {

std::string clause_part(std::string_view s) { return text::strip_terminal_punctuation(s); }

}  // namespace

std::string render_statement(const RoTStatement& s) {
  const std::string judgment = clause_part(s.judgment);
  const std::string action = clause_part(s.action);
  std::string out;
  if (s.has_situation && s.clause_order == ClauseOrder::situation_first) {
    out = text::capitalize(s.conjunction) + " " + clause_part(s.situation) + ", " +
          text::lower_leading(judgment) + " " + action;
  } else {
    out = text::capitalize(judgment) + " " + action;
    if (s.has_situation) out += " " + s.conjunction + " " + clause_part(s.situation);
  }
  return out + ".";
}

RoTStatement compose_statement(const RoTRecord& r, std::string_view conjunction) {
  RoTStatement s;
  s.source_id = r.id;
  s.judgment = clause_part(r.judgment);
  s.action = clause_part(r.action);
  s.conjunction = std::string(conjunction);
  if (r.situation && !text::trim(*r.situation).empty()) {
    s.has_situation = true;
    s.situation = clause_part(*r.situation);
  }
  s.text = render_statement(s);
  return s;
}

std::string_view pick_conjunction(Rng& rng) { return kWhenConjunctions[rng.index(kWhenConjunctions.size())]; }

RoTStatement vary_statement(const RoTStatement& s, Rng& rng, const VariationOptions& options) {
  RoTStatement out = s;
  const bool drop = rng.bernoulli(options.p_drop);
  const bool swap = rng.bernoulli(options.p_swap);
  if (!out.has_situation) return out;
  if (drop) {
    out.has_situation = false;
    out.situation.clear();
    out.clause_order = ClauseOrder::judgment_first;
  } else if (swap) {
    out.clause_order = ClauseOrder::situation_first;
  }
  out.text = render_statement(out);
  return out;
}

ParsedStatement parse_statement(std::string_view raw) {
  ParsedStatement p;
  const std::string body = text::strip_terminal_punctuation(raw);
  const std::string lower = text::to_lower(body);

  for (auto conj : kWhenConjunctions) {
    const std::string prefix = std::string(conj) + " ";
    if (lower.rfind(prefix, 0) == 0) {
      auto comma = body.find(", ", prefix.size());
      if (comma == std::string::npos) break;
      p.clause_order = ClauseOrder::situation_first;
      p.conjunction = std::string(conj);
      p.situation = body.substr(prefix.size(), comma - prefix.size());
      p.main_clause = body.substr(comma + 2);
      return p;
    }
  }

  std::size_t best = std::string::npos;
  std::string_view best_conj;
  for (auto conj : kWhenConjunctions) {
    const std::string needle = " " + std::string(conj) + " ";
    auto pos = lower.rfind(needle);
    if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
      best = pos;
      best_conj = conj;
    }
  }
  if (best != std::string::npos) {
    p.conjunction = std::string(best_conj);
    p.main_clause = body.substr(0, best);
    p.situation = body.substr(best + best_conj.size() + 2);
  } else {
    p.main_clause = body;
  }
  return p;
}

PretrainCorpus emit_pretrain_corpus(const std::vector<RoTRecord>& records, std::uint64_t seed,
                                    const SplitRatios& ratios, const VariationOptions& variation) {
  const double total = ratios.train + ratios.dev + ratios.test;
  if (std::abs(total - 1.0) > 1e-9 || ratios.train < 0 || ratios.dev < 0 || ratios.test < 0) {
    throw InputError("split ratios must be non-negative and sum to 1");
  }

  struct Line {
    std::string id;
    std::string text;
  };
  std::vector<Line> lines;
  std::unordered_set<std::string> seen;
  PretrainCorpus corpus;
  for (const auto& r : records) {
    Rng rng(seed, r.id);
    const auto conj = pick_conjunction(rng);
    auto statement = vary_statement(compose_statement(r, conj), rng, variation);
    if (!seen.insert(statement.text).second) {
      ++corpus.duplicates_removed;
      continue;
    }
    lines.push_back({r.id, std::move(statement.text)});
  }

  Rng split_rng(seed, "pretrain-split");
  split_rng.shuffle(lines);

  const std::size_t n = lines.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
  const auto n_dev = std::min(n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.dev)));
  for (std::size_t i = 0; i < n; ++i) {
    auto [texts, ids] = i < n_train ? std::tie(corpus.train, corpus.train_ids)
                         : i < n_train + n_dev ? std::tie(corpus.dev, corpus.dev_ids)
                                               : std::tie(corpus.test, corpus.test_ids);
    texts.push_back(std::move(lines[i].text));
    ids.push_back(std::move(lines[i].id));
  }
  return corpus;
}

void write_pretrain_corpus(const std::filesystem::path& dir, const PretrainCorpus& corpus) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::vector<std::string>& lines) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    for (const auto& line : lines) out << line << '\n';
  };
  write("pretrain.train.txt", corpus.train);
  write("pretrain.dev.txt", corpus.dev);
  write("pretrain.test.txt", corpus.test);
}

}  // namespace moraldial
