#include <doctest.h>

#include <algorithm>

#include "moraldial/corpus_ingest.hpp"
#include "moraldial/scorer_data.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::data_dir;
using moraldial::testing::TempDir;

namespace {

std::vector<MetaSample> fixture() { return load_meta_samples(data_dir() / "flows/mic_50.csv").records; }

}  // namespace

TEST_CASE("paraphrase of an answer becomes a neutral nonsense explanation") {
  MetaSample a;
  a.id = "x1";
  a.question = "Are they right?";
  a.answer = "they are wrong";
  a.rot = {.id = "r1", .judgment = "It's good", .action = "to listen", .consensus = 4};
  a.alignment = Alignment::disagree;
  std::vector<MetaSample> samples;
  for (int i = 0; i < 10; ++i) {
    auto s = a;
    s.id = "x" + std::to_string(i);
    if (i > 0) {
      s.answer = "answer " + std::to_string(i);
      s.rot.id = "r" + std::to_string(i);
      s.rot.action = "to do " + std::to_string(i);
    }
    samples.push_back(s);
  }
  ParaphraseSource para(std::unordered_map<std::string, std::string>{{"they are wrong", "because they are wrong"}});
  auto ds = build_scorer_dataset(samples, {}, &para);
  const auto& train = ds.examples[Split::train];
  auto it = std::find_if(train.begin(), train.end(),
                         [](const ScorerExample& e) { return e.provenance == Provenance::nonsense_explanation; });
  REQUIRE(it != train.end());
  CHECK(it->rot == "because they are wrong");
  CHECK(it->label == Alignment::neutral);
  CHECK(it->answer == "they are wrong");
  CHECK(ds.warnings.empty());
}

TEST_CASE("augmented examples are always neutral and annotated labels are kept") {
  auto samples = fixture();
  auto ds = build_scorer_dataset(samples, {.seed = 2}, nullptr);
  std::size_t annotated = 0, irrelevant = 0;
  for (const auto& [split, examples] : ds.examples) {
    for (const auto& e : examples) {
      if (e.provenance == Provenance::annotated) {
        ++annotated;
      } else {
        ++irrelevant;
        CHECK(e.label == Alignment::neutral);
        CHECK(e.provenance == Provenance::irrelevant_answer);
      }
    }
  }
  CHECK(annotated == samples.size());
  CHECK(irrelevant == samples.size());
  CHECK(ds.warnings.size() == 1);  // no paraphrase source
}

TEST_CASE("irrelevant pairing never reuses the sample's own RoT") {
  auto samples = fixture();
  auto ds = build_scorer_dataset(samples, {.seed = 5}, nullptr);
  std::map<std::string, std::string> rot_of;
  for (const auto& [split, examples] : ds.examples) {
    for (const auto& e : examples) {
      if (e.provenance == Provenance::annotated) rot_of[e.source_id] = e.rot;
    }
  }
  for (const auto& [split, examples] : ds.examples) {
    for (const auto& e : examples) {
      if (e.provenance != Provenance::irrelevant_answer) continue;
      const auto own = e.source_id.substr(0, e.source_id.find('+'));
      CHECK(e.rot != rot_of.at(own));
    }
  }
}

TEST_CASE("fixed seed gives a byte-identical dataset") {
  TempDir a, b;
  write_scorer_dataset(a.path(), build_scorer_dataset(fixture(), {.seed = 9}, nullptr));
  write_scorer_dataset(b.path(), build_scorer_dataset(fixture(), {.seed = 9}, nullptr));
  for (auto name : {"scorer.train.jsonl", "scorer.dev.jsonl", "scorer.test.jsonl", "scorer_stats.json"}) {
    CHECK(testing::read_file(a / name) == testing::read_file(b / name));
  }
}
