#include <doctest.h>

#include <algorithm>
#include <set>

#include "moraldial/corpus_ingest.hpp"
#include "moraldial/flow_builder.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/rot_composer.hpp"
#include "moraldial/text.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::data_dir;
using moraldial::testing::TempDir;

namespace {

MetaSample sample(std::string id, Alignment alignment, int consensus, bool with_revised,
                  std::string rot_text = "You shouldn't interrupt people", std::string question = "") {
  MetaSample s;
  s.id = id;
  s.question = question.empty() ? "Question " + id + "?" : question;
  s.answer = "Answer " + id + ".";
  if (with_revised) s.revised_answer = "Revised " + id + ".";
  auto [judgment, action] = split_rot_text(rot_text);
  s.rot.id = rot_id_for_text(rot_text);
  s.rot.judgment = judgment;
  s.rot.action = action;
  s.rot.consensus = consensus;
  s.rot.severity = 3;
  s.rot.foundations = {Foundation::care};
  s.alignment = alignment;
  s.split = Split::train;
  return s;
}

bool contains_phrase(const std::vector<std::string>& phrases, const std::string& text) {
  return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& p) { return text.rfind(p, 0) == 0; });
}

}  // namespace

TEST_CASE("filter_meta decisions") {
  CHECK(filter_meta(sample("a", Alignment::disagree, 5, true), 4) == FilterDecision::keep_Aprime);
  CHECK(filter_meta(sample("b", Alignment::agree, 2, true), 4) == FilterDecision::keep_A);
  CHECK(filter_meta(sample("c", Alignment::agree, 5, true), 4) == FilterDecision::both);
  CHECK(filter_meta(sample("d", Alignment::disagree, 2, true), 4) == FilterDecision::neither);
  CHECK(filter_meta(sample("e", Alignment::disagree, 5, false), 4) == FilterDecision::neither);
  CHECK(filter_meta(sample("f", Alignment::neutral, 4, true), 4) == FilterDecision::both);
}

TEST_CASE("build_ma") {
  auto both = sample("a", Alignment::agree, 5, true);
  auto flows = build_ma(both, filter_meta(both, 4));
  REQUIRE(flows.size() == 2);
  for (const auto& f : flows) {
    CHECK(f.turns.size() == 2);
    CHECK(check_flow_shape(f).empty());
    CHECK(modeling_target(f.kind) == "P(A|Q)");
  }
  CHECK(flows[0].turns[1].text == both.answer);
  CHECK(flows[1].turns[1].text == *both.revised_answer);

  CHECK(build_ma(both, FilterDecision::neither).empty());

  // 2 both, 2 A-only, 2 neither -> 6 flows
  std::vector<MetaSample> six = {sample("1", Alignment::agree, 5, true),    sample("2", Alignment::neutral, 4, true),
                                 sample("3", Alignment::agree, 2, true),    sample("4", Alignment::agree, 5, false),
                                 sample("5", Alignment::disagree, 2, true), sample("6", Alignment::disagree, 5, false)};
  std::size_t total = 0;
  for (const auto& s : six) total += build_ma(s, filter_meta(s, 4)).size();
  CHECK(total == 6);
}

TEST_CASE("build_me draws a why-phrase reproducibly") {
  auto s = sample("a", Alignment::agree, 5, true);
  const auto& bank = PhraseBank::standard();
  Rng r1(3, s.id), r2(3, s.id);
  auto f1 = build_me(s, filter_meta(s, 4), r1);
  auto f2 = build_me(s, filter_meta(s, 4), r2);
  REQUIRE(f1.size() == 1);
  CHECK(f1[0].turns == f2[0].turns);
  CHECK(check_flow_shape(f1[0]).empty());
  CHECK(std::find(bank.why_class.begin(), bank.why_class.end(), f1[0].turns[2].text) != bank.why_class.end());
  CHECK(f1[0].turns[3].text == "You shouldn't interrupt people.");
  CHECK(bank.why_class.size() == 16);

  Rng r3(3, s.id);
  auto many = build_me(s, filter_meta(s, 4), r3, 40);
  CHECK(many.size() == 16);
  std::set<std::string> distinct;
  for (const auto& f : many) distinct.insert(f.turns[2].text);
  CHECK(distinct.size() == 16);

  Rng r4(3);
  auto missing = sample("b", Alignment::agree, 5, false);
  CHECK(build_me(missing, filter_meta(missing, 4), r4).empty());
}

TEST_CASE("build_mr only for misaligned samples; third turn opens with a But-class phrase") {
  const auto& bank = PhraseBank::standard();
  Rng rng(1);
  auto aligned = sample("a", Alignment::agree, 5, true);
  CHECK_FALSE(build_mr(aligned, filter_meta(aligned, 4), rng).has_value());

  auto mis = sample("b", Alignment::disagree, 5, true);
  auto f = build_mr(mis, filter_meta(mis, 4), rng);
  REQUIRE(f.has_value());
  CHECK(f->turns.size() == 4);
  CHECK(check_flow_shape(*f).empty());
  CHECK(contains_phrase(bank.but_class, f->turns[2].text));
  CHECK(contains_phrase(bank.sorry_class, f->turns[3].text));
  CHECK(f->turns[1].text == mis.answer);

  // 10 samples, 3 misaligned -> 3 flows
  std::size_t count = 0;
  for (int i = 0; i < 10; ++i) {
    auto s = sample("s" + std::to_string(i), i < 3 ? Alignment::disagree : Alignment::agree, 5, true);
    count += build_mr(s, filter_meta(s, 4), rng).has_value() ? 1 : 0;
  }
  CHECK(count == 3);
}

TEST_CASE("join_phrase lower-cases the sentence after a mid-sentence phrase") {
  CHECK(join_phrase("But I think", "It's wrong to lie.") == "But I think it's wrong to lie.");
  CHECK(join_phrase("I'm sorry.", "You are right.") == "I'm sorry. You are right.");
  CHECK(join_phrase("But I think", "I should stay.") == "But I think I should stay.");
}

TEST_CASE("build_ril") {
  Rng rng(4);
  auto base = sample("a", Alignment::agree, 5, true, "It's rude to interrupt people", "Can I talk over my friend?");
  auto partner = sample("b", Alignment::agree, 5, true, "It's rude to interrupt people", "Should I wait my turn?");
  auto me = build_me(base, filter_meta(base, 4), rng);
  REQUIRE(me.size() == 1);
  auto ril = build_ril(me[0], base, partner, 4, rng);
  REQUIRE(ril.has_value());
  CHECK(ril->turns.size() == 6);
  CHECK(check_flow_shape(*ril).empty());
  CHECK(ril->turns[5].text == *partner.revised_answer);
  CHECK(contains_phrase(PhraseBank::standard().base_class, ril->turns[4].text));
  CHECK(text::icontains(ril->turns[4].text, "should I wait my turn?"));
  CHECK(ril->source_sample_ids == std::vector<std::string>{"a", "b"});

  auto other_rot = sample("c", Alignment::agree, 5, true, "You should be kind");
  CHECK_FALSE(build_ril(me[0], base, other_rot, 4, rng).has_value());
}

TEST_CASE("a RoT with a single question yields no RIL; three questions yield two") {
  std::vector<MetaSample> samples;
  for (auto id : {"q1", "q2", "q3"}) samples.push_back(sample(id, Alignment::agree, 5, true, "It's good to share"));
  samples.push_back(sample("q4", Alignment::agree, 5, true, "You should say thanks"));
  auto ds = build_flows(samples, {.seed = 1});
  std::size_t ril = 0;
  for (const auto& f : ds.flows[Split::train]) {
    if (f.kind != FlowKind::RIL) continue;
    ++ril;
    CHECK(f.rot_id == rot_id_for_text("It's good to share"));
  }
  CHECK(ril == 2);
  CHECK(ds.stats.skipped["ril:no_partner"] == 2);
}

TEST_CASE("check_flow_shape reports bad flows") {
  auto s = sample("a", Alignment::agree, 5, true);
  auto f = build_ma(s, FilterDecision::keep_A)[0];
  f.turns.push_back(f.turns[0]);
  CHECK_FALSE(check_flow_shape(f).empty());
  f.turns.pop_back();
  std::swap(f.turns[0].speaker, f.turns[1].speaker);
  CHECK_FALSE(check_flow_shape(f).empty());
}

TEST_CASE("flow JSON round trip") {
  Rng rng(1);
  auto s = sample("b", Alignment::disagree, 5, true);
  auto f = *build_mr(s, filter_meta(s, 4), rng);
  DialogueFlow back = nlohmann::json(f).get<DialogueFlow>();
  CHECK(back.turns == f.turns);
  CHECK(back.id == f.id);
  CHECK(nlohmann::json(back) == nlohmann::json(f));
  auto j = nlohmann::json(f);
  CHECK(j["target"]["modeling"] == "P(A'|Q,A,R)");
  CHECK(j["target"]["response"] == 3);
}

TEST_CASE("50-sample fixture: golden files, shapes and split hygiene") {
  auto samples = load_meta_samples(data_dir() / "flows/mic_50.csv").records;
  REQUIRE(samples.size() == 50);
  auto ds = build_flows(samples, {.seed = 7});
  TempDir tmp;
  write_flow_dataset(tmp.path(), ds);
  for (auto name : {"flows.train.jsonl", "flows.dev.jsonl", "flows.test.jsonl", "flow_stats.json"}) {
    CAPTURE(name);
    CHECK(testing::read_file(tmp / name) == testing::read_file(data_dir() / "flows/golden" / name));
  }

  std::map<std::string, const MetaSample*> by_id;
  for (const auto& s : samples) by_id[s.id] = &s;
  std::map<Split, std::set<std::string>> questions;
  for (const auto& [split, flows] : ds.flows) {
    for (const auto& f : flows) {
      CAPTURE(f.id);
      CHECK(check_flow_shape(f).empty());
      CHECK(f.turns.size() == expected_turns(f.kind));
      if (f.kind == FlowKind::MR) CHECK(by_id.at(f.source_sample_ids[0])->alignment == Alignment::disagree);
      questions[split].insert(f.turns[0].text);
    }
  }
  for (const auto& q : questions[Split::train]) {
    CHECK(questions[Split::dev].count(q) == 0);
    CHECK(questions[Split::test].count(q) == 0);
  }
  CHECK(ds.stats.leaked_questions_dropped == 1);
  CHECK(ds.stats.rot_overlap_dev > 0.0);
  CHECK(ds.stats.rot_overlap_dev < 1.0);
  CHECK(ds.stats.rot_overlap_test > 0.0);
}

TEST_CASE("build_flows is deterministic and input-order independent") {
  auto samples = load_meta_samples(data_dir() / "flows/mic_50.csv").records;
  auto a = build_flows(samples, {.seed = 3});
  std::reverse(samples.begin(), samples.end());
  auto b = build_flows(samples, {.seed = 3});
  for (auto split : kAllSplits) {
    REQUIRE(a.flows[split].size() == b.flows[split].size());
    for (std::size_t i = 0; i < a.flows[split].size(); ++i) {
      CHECK(nlohmann::json(a.flows[split][i]) == nlohmann::json(b.flows[split][i]));
    }
  }
  auto dup = samples;
  dup.push_back(samples.front());
  CHECK_THROWS_AS(build_flows(dup, {}), InputError);
}

TEST_CASE("general dialogue lines are appended to the train file") {
  auto samples = load_meta_samples(data_dir() / "flows/mic_50.csv").records;
  auto ds = build_flows(samples, {.seed = 7});
  TempDir tmp;
  testing::write_file(tmp / "gd.jsonl", "{\"gd\":1}\n\n{\"gd\":2}\n");
  write_flow_dataset(tmp / "out", ds, tmp / "gd.jsonl");
  auto lines = jsonl::read_all(tmp / "out/flows.train.jsonl");
  CHECK(lines.size() == ds.flows[Split::train].size() + 2);
  CHECK(lines.back() == nlohmann::json{{"gd", 2}});
}
