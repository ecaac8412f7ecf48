#include "moraldial/flow_builder.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "moraldial/error.hpp"
#include "moraldial/rot_composer.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

std::string_view to_string(FlowKind k) {
  switch (k) {
    case FlowKind::MA: return "MA";
    case FlowKind::ME: return "ME";
    case FlowKind::MR: return "MR";
    case FlowKind::RIL: return "RIL";
  }
  return "?";
}

std::string_view to_string(Speaker s) { return s == Speaker::user ? "user" : "bot"; }

std::string_view to_string(TurnTag t) {
  switch (t) {
    case TurnTag::question: return "question";
    case TurnTag::answer: return "answer";
    case TurnTag::why: return "why";
    case TurnTag::rot: return "rot";
    case TurnTag::revised_answer: return "revised_answer";
    case TurnTag::new_question: return "new_question";
    case TurnTag::new_answer: return "new_answer";
  }
  return "?";
}

std::optional<FlowKind> parse_flow_kind(std::string_view s) {
  const std::string v = text::to_lower(text::trim(s));
  for (auto k : kAllFlowKinds) {
    if (v == text::to_lower(to_string(k))) return k;
  }
  return std::nullopt;
}

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "user") return Speaker::user;
  if (s == "bot") return Speaker::bot;
  return std::nullopt;
}

std::optional<TurnTag> parse_turn_tag(std::string_view s) {
  for (auto t : {TurnTag::question, TurnTag::answer, TurnTag::why, TurnTag::rot, TurnTag::revised_answer,
                 TurnTag::new_question, TurnTag::new_answer}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::size_t expected_turns(FlowKind kind) {
  switch (kind) {
    case FlowKind::MA: return 2;
    case FlowKind::ME: return 4;
    case FlowKind::MR: return 4;
    case FlowKind::RIL: return 6;
  }
  return 0;
}

std::string_view modeling_target(FlowKind kind) {
  switch (kind) {
    case FlowKind::MA: return "P(A|Q)";
    case FlowKind::ME: return "P(R|Q,A',W)";
    case FlowKind::MR: return "P(A'|Q,A,R)";
    case FlowKind::RIL: return "P(A_new|ME/MR,Q_new)";
  }
  return "?";
}

void to_json(json& j, const Turn& t) {
  j = json{{"speaker", to_string(t.speaker)}, {"tag", to_string(t.tag)}, {"text", t.text}};
}

void from_json(const json& j, Turn& t) {
  auto speaker = parse_speaker(j.at("speaker").get<std::string>());
  auto tag = parse_turn_tag(j.at("tag").get<std::string>());
  if (!speaker || !tag) throw InputError("invalid turn: " + j.dump());
  t = Turn{*speaker, j.at("text").get<std::string>(), *tag};
}

void to_json(json& j, const DialogueFlow& f) {
  const auto n = f.turns.size();
  j = json{{"id", f.id},
           {"kind", to_string(f.kind)},
           {"split", to_string(f.split)},
           {"rot_id", f.rot_id},
           {"source_sample_ids", f.source_sample_ids},
           {"turns", f.turns},
           {"target",
            {{"context", json::array({0, n == 0 ? 0 : n - 1})},
             {"response", f.response_index()},
             {"modeling", modeling_target(f.kind)}}}};
}

void from_json(const json& j, DialogueFlow& f) {
  auto kind = parse_flow_kind(j.at("kind").get<std::string>());
  auto split = parse_split(j.at("split").get<std::string>());
  if (!kind || !split) throw InputError("invalid flow: " + j.value("id", std::string("?")));
  f.id = j.at("id").get<std::string>();
  f.kind = *kind;
  f.split = *split;
  f.rot_id = j.value("rot_id", std::string());
  f.source_sample_ids = j.at("source_sample_ids").get<std::vector<std::string>>();
  f.turns = j.at("turns").get<std::vector<Turn>>();
}

namespace {

std::vector<TurnTag> expected_tags(const DialogueFlow& flow) {
  switch (flow.kind) {
    case FlowKind::MA: return {TurnTag::question, flow.turns.size() == 2 ? flow.turns[1].tag : TurnTag::answer};
    case FlowKind::ME: return {TurnTag::question, TurnTag::revised_answer, TurnTag::why, TurnTag::rot};
    case FlowKind::MR: return {TurnTag::question, TurnTag::answer, TurnTag::rot, TurnTag::revised_answer};
    case FlowKind::RIL: {
      std::vector<TurnTag> tags;
      if (flow.turns.size() >= 3 && flow.turns[2].tag == TurnTag::why) {
        tags = {TurnTag::question, TurnTag::revised_answer, TurnTag::why, TurnTag::rot};
      } else {
        tags = {TurnTag::question, TurnTag::answer, TurnTag::rot, TurnTag::revised_answer};
      }
      tags.push_back(TurnTag::new_question);
      tags.push_back(TurnTag::new_answer);
      return tags;
    }
  }
  return {};
}

std::string question_key(std::string_view q) { return text::to_lower(text::trim(q)); }

Turn user(std::string text, TurnTag tag) { return Turn{Speaker::user, std::move(text), tag}; }
Turn bot(std::string text, TurnTag tag) { return Turn{Speaker::bot, std::move(text), tag}; }

DialogueFlow make_flow(const MetaSample& s, FlowKind kind, std::string suffix) {
  DialogueFlow f;
  f.id = s.id + "/" + std::move(suffix);
  f.kind = kind;
  f.split = s.split;
  f.source_sample_ids = {s.id};
  f.rot_id = s.rot.id;
  return f;
}

std::string rot_sentence(const RoTRecord& rot, Rng& rng) {
  if (rot.situation) return compose_statement(rot, pick_conjunction(rng)).text;
  return compose_statement(rot).text;
}

}  // namespace

std::vector<std::string> check_flow_shape(const DialogueFlow& flow) {
  std::vector<std::string> problems;
  if (flow.turns.size() != expected_turns(flow.kind)) {
    problems.push_back(std::string(to_string(flow.kind)) + " flow has " + std::to_string(flow.turns.size()) +
                       " turns, expected " + std::to_string(expected_turns(flow.kind)));
    return problems;
  }
  const auto tags = expected_tags(flow);
  for (std::size_t i = 0; i < flow.turns.size(); ++i) {
    const Speaker want = i % 2 == 0 ? Speaker::user : Speaker::bot;
    if (flow.turns[i].speaker != want) problems.push_back("turn " + std::to_string(i) + " has wrong speaker");
    if (flow.turns[i].tag != tags[i]) problems.push_back("turn " + std::to_string(i) + " has wrong tag");
    if (text::trim(flow.turns[i].text).empty()) problems.push_back("turn " + std::to_string(i) + " is empty");
  }
  if (flow.kind == FlowKind::MA && flow.turns[1].tag != TurnTag::answer &&
      flow.turns[1].tag != TurnTag::revised_answer) {
    problems.push_back("MA response must be an answer");
  }
  return problems;
}

std::string_view to_string(FilterDecision d) {
  switch (d) {
    case FilterDecision::keep_A: return "keep_A";
    case FilterDecision::keep_Aprime: return "keep_Aprime";
    case FilterDecision::both: return "both";
    case FilterDecision::neither: return "neither";
  }
  return "?";
}

FilterDecision filter_meta(const MetaSample& s, int consensus_floor) {
  const bool keep_a = s.alignment != Alignment::disagree;
  const bool keep_aprime = s.revised_answer && !text::trim(*s.revised_answer).empty() &&
                           s.rot.consensus >= consensus_floor;
  if (keep_a && keep_aprime) return FilterDecision::both;
  if (keep_a) return FilterDecision::keep_A;
  if (keep_aprime) return FilterDecision::keep_Aprime;
  return FilterDecision::neither;
}

bool keeps_answer(FilterDecision d) { return d == FilterDecision::keep_A || d == FilterDecision::both; }
bool keeps_revised(FilterDecision d) { return d == FilterDecision::keep_Aprime || d == FilterDecision::both; }

std::vector<DialogueFlow> build_ma(const MetaSample& s, FilterDecision decision) {
  std::vector<DialogueFlow> flows;
  if (keeps_answer(decision)) {
    auto f = make_flow(s, FlowKind::MA, "ma-a");
    f.turns = {user(s.question, TurnTag::question), bot(s.answer, TurnTag::answer)};
    flows.push_back(std::move(f));
  }
  if (keeps_revised(decision)) {
    auto f = make_flow(s, FlowKind::MA, "ma-r");
    f.turns = {user(s.question, TurnTag::question), bot(*s.revised_answer, TurnTag::revised_answer)};
    flows.push_back(std::move(f));
  }
  return flows;
}

std::vector<DialogueFlow> build_me(const MetaSample& s, FilterDecision decision, Rng& rng, std::size_t multiplicity,
                                   const PhraseBank& phrases) {
  std::vector<DialogueFlow> flows;
  if (!keeps_revised(decision) || multiplicity == 0) return flows;

  std::vector<std::size_t> order(phrases.why_class.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t m = std::min(multiplicity, order.size());
  // partial Fisher-Yates: the first m slots become a uniform sample without replacement
  for (std::size_t i = 0; i < m; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);

  const std::string rot = rot_sentence(s.rot, rng);
  for (std::size_t i = 0; i < m; ++i) {
    auto f = make_flow(s, FlowKind::ME, "me-" + std::to_string(i));
    f.turns = {user(s.question, TurnTag::question), bot(*s.revised_answer, TurnTag::revised_answer),
               user(phrases.why_class[order[i]], TurnTag::why), bot(rot, TurnTag::rot)};
    flows.push_back(std::move(f));
  }
  return flows;
}

std::optional<DialogueFlow> build_mr(const MetaSample& s, FilterDecision decision, Rng& rng,
                                     const PhraseBank& phrases) {
  if (s.alignment != Alignment::disagree || !keeps_revised(decision)) return std::nullopt;
  const auto& but = pick_phrase(phrases.but_class, rng);
  const auto& sorry = pick_phrase(phrases.sorry_class, rng);
  const std::string rot = rot_sentence(s.rot, rng);
  auto f = make_flow(s, FlowKind::MR, "mr");
  f.turns = {user(s.question, TurnTag::question), bot(s.answer, TurnTag::answer),
             user(join_phrase(but, rot), TurnTag::rot), bot(join_phrase(sorry, *s.revised_answer), TurnTag::revised_answer)};
  return f;
}

std::optional<std::string> partner_answer(const MetaSample& partner, int consensus_floor) {
  const auto decision = filter_meta(partner, consensus_floor);
  if (keeps_revised(decision)) return *partner.revised_answer;
  if (keeps_answer(decision)) return partner.answer;
  return std::nullopt;
}

std::optional<DialogueFlow> build_ril(const DialogueFlow& base, const MetaSample& base_sample,
                                      const MetaSample& paired, int consensus_floor, Rng& rng,
                                      const PhraseBank& phrases) {
  if (base.kind != FlowKind::ME && base.kind != FlowKind::MR) return std::nullopt;
  if (paired.rot.id != base_sample.rot.id || paired.id == base_sample.id) return std::nullopt;
  if (question_key(paired.question) == question_key(base_sample.question)) return std::nullopt;
  auto answer = partner_answer(paired, consensus_floor);
  if (!answer) return std::nullopt;

  const auto& lead = pick_phrase(phrases.base_class, rng);
  DialogueFlow f = base;
  f.id = base.id + "/ril";
  f.kind = FlowKind::RIL;
  f.source_sample_ids.push_back(paired.id);
  f.turns.push_back(user(join_phrase(lead, paired.question), TurnTag::new_question));
  f.turns.push_back(bot(*answer, TurnTag::new_answer));
  return f;
}

void to_json(json& j, const FlowStats& s) {
  j = json::object();
  for (const auto& [name, k] : s.kinds) {
    j["kinds"][name] = {{"samples", k.samples},
                        {"turns", k.turns},
                        {"mean_context_words", k.mean_context_words},
                        {"mean_response_words", k.mean_response_words},
                        {"modeling", name == "Overall" ? std::string("P(Response|Context)")
                                                       : std::string(modeling_target(*parse_flow_kind(name)))}};
  }
  j["flows_per_split"] = s.flows_per_split;
  j["skipped"] = s.skipped;
  j["leaked_questions_dropped"] = s.leaked_questions_dropped;
  j["rot_overlap"] = {{"dev", s.rot_overlap_dev}, {"test", s.rot_overlap_test}};
}

namespace {

FlowStats compute_stats(const std::map<Split, std::vector<DialogueFlow>>& flows) {
  FlowStats stats;
  struct Acc {
    std::size_t n = 0;
    std::size_t turns = 0;
    double context = 0;
    double response = 0;
  };
  std::map<std::string, Acc> acc;
  std::map<Split, std::set<std::string>> rots;
  for (const auto& [split, list] : flows) {
    stats.flows_per_split[std::string(to_string(split))] = list.size();
    for (const auto& f : list) {
      double ctx = 0;
      for (std::size_t i = 0; i + 1 < f.turns.size(); ++i) ctx += static_cast<double>(text::word_count(f.turns[i].text));
      const double resp = f.turns.empty() ? 0.0 : static_cast<double>(text::word_count(f.turns.back().text));
      for (const auto& key : {std::string(to_string(f.kind)), std::string("Overall")}) {
        auto& a = acc[key];
        ++a.n;
        a.turns += f.turns.size();
        a.context += ctx;
        a.response += resp;
      }
      rots[split].insert(f.rot_id);
    }
  }
  for (auto kind : kAllFlowKinds) acc.try_emplace(std::string(to_string(kind)));
  for (const auto& [key, a] : acc) {
    KindStats k;
    k.samples = a.n;
    k.turns = key == "Overall" ? 0 : expected_turns(*parse_flow_kind(key));
    if (a.n > 0) {
      k.mean_context_words = a.context / static_cast<double>(a.n);
      k.mean_response_words = a.response / static_cast<double>(a.n);
      if (key == "Overall") k.turns = static_cast<std::size_t>(std::llround(static_cast<double>(a.turns) / static_cast<double>(a.n)));
    }
    stats.kinds[key] = k;
  }
  auto overlap = [&](Split s) {
    const auto& target = rots[s];
    if (target.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& id : target) shared += rots[Split::train].count(id);
    return static_cast<double>(shared) / static_cast<double>(target.size());
  };
  stats.rot_overlap_dev = overlap(Split::dev);
  stats.rot_overlap_test = overlap(Split::test);
  return stats;
}

}  // namespace

FlowDataset build_flows(std::vector<MetaSample> samples, const BuildFlowsOptions& options) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].id == samples[i - 1].id) throw InputError("duplicate sample id " + samples[i].id);
  }

  FlowDataset dataset;
  auto& skipped = dataset.stats.skipped;

  std::unordered_set<std::string> train_questions;
  for (const auto& s : samples) {
    if (s.split == Split::train) train_questions.insert(question_key(s.question));
  }
  std::size_t leaked = 0;
  std::erase_if(samples, [&](const MetaSample& s) {
    const bool leak = s.split != Split::train && train_questions.count(question_key(s.question)) > 0;
    leaked += leak ? 1 : 0;
    return leak;
  });

  // per-sample flow lists, emitted in id order once RIL has been added
  std::vector<std::vector<DialogueFlow>> per_sample(samples.size());
  std::vector<std::vector<std::size_t>> bases(samples.size());  // indices into per_sample[i]
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    Rng rng(options.seed, s.id);
    const auto decision = filter_meta(s, options.consensus_floor);
    auto& out = per_sample[i];

    auto ma = build_ma(s, decision);
    if (ma.empty()) ++skipped["ma:filtered"];
    out.insert(out.end(), ma.begin(), ma.end());

    auto me = build_me(s, decision, rng, options.me_multiplicity);
    if (me.empty()) ++skipped[s.revised_answer ? "me:low_consensus" : "me:missing_revised_answer"];
    for (auto& f : me) {
      bases[i].push_back(out.size());
      out.push_back(std::move(f));
    }

    if (auto mr = build_mr(s, decision, rng)) {
      bases[i].push_back(out.size());
      out.push_back(std::move(*mr));
    } else if (s.alignment == Alignment::disagree) {
      ++skipped["mr:revised_answer_filtered"];
    }
  }

  std::map<std::pair<Split, std::string>, std::vector<std::size_t>> by_rot;
  for (std::size_t i = 0; i < samples.size(); ++i) by_rot[{samples[i].split, samples[i].rot.id}].push_back(i);
  for (const auto& [key, group] : by_rot) {
    for (std::size_t j = 0; j < group.size(); ++j) {
      const std::size_t i = group[j];
      if (bases[i].empty()) continue;
      if (j + 1 >= group.size()) {
        skipped["ril:no_partner"] += bases[i].size();
        continue;
      }
      const auto& partner = samples[group[j + 1]];
      Rng rng(options.seed, samples[i].id + "/ril");
      std::vector<DialogueFlow> ril;
      for (auto b : bases[i]) {
        if (auto f = build_ril(per_sample[i][b], samples[i], partner, options.consensus_floor, rng)) {
          ril.push_back(std::move(*f));
        } else {
          ++skipped["ril:partner_unusable"];
        }
      }
      per_sample[i].insert(per_sample[i].end(), ril.begin(), ril.end());
    }
  }

  for (auto split : kAllSplits) dataset.flows[split];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (auto& f : per_sample[i]) dataset.flows[f.split].push_back(std::move(f));
  }
  auto stats = compute_stats(dataset.flows);
  stats.skipped = std::move(skipped);
  stats.leaked_questions_dropped = leaked;
  dataset.stats = std::move(stats);
  return dataset;
}

void write_flow_dataset(const std::filesystem::path& dir, const FlowDataset& dataset,
                        const std::optional<std::filesystem::path>& general_dialogue) {
  std::filesystem::create_directories(dir);
  for (auto split : kAllSplits) {
    const auto path = dir / ("flows." + std::string(to_string(split)) + ".jsonl");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    if (auto it = dataset.flows.find(split); it != dataset.flows.end()) {
      for (const auto& f : it->second) out << json(f).dump() << '\n';
    }
    if (split == Split::train && general_dialogue) {
      std::ifstream gd(*general_dialogue, std::ios::binary);
      if (!gd) throw InputError("cannot open " + general_dialogue->string());
      std::string line;
      while (std::getline(gd, line)) {
        if (!text::trim(line).empty()) out << line << '\n';
      }
    }
  }
  std::ofstream stats(dir / "flow_stats.json", std::ios::binary | std::ios::trunc);
  stats << json(dataset.stats).dump(2) << '\n';
}

}  // namespace moraldial
