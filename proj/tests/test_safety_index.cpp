#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "moraldial/error.hpp"
#include "moraldial/random.hpp"
#include "moraldial/safety_index.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::TempDir;

namespace {

RoTRecord mic(std::string id, std::string judgment, std::string action, int severity, int consensus) {
  RoTRecord r;
  r.id = std::move(id);
  r.judgment = std::move(judgment);
  r.action = std::move(action);
  r.severity = severity;
  r.consensus = consensus;
  r.foundations = {Foundation::care};
  r.source = Source::mic;
  return r;
}

RoTRecord social(std::string id, std::string judgment, std::string action, int consensus, int pressure) {
  RoTRecord r;
  r.id = std::move(id);
  r.judgment = std::move(judgment);
  r.action = std::move(action);
  r.consensus = consensus;
  r.pressure = pressure;
  r.source = Source::social_chem;
  return r;
}

// Embedder returning preset vectors by text.
class TableEmbedder final : public Embedder {
 public:
  std::map<std::string, Embedding> table;
  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) out.push_back(table.at(t));
    return out;
  }
};

}  // namespace

TEST_CASE("safety RoT selection") {
  auto kept = mic("m1", "You shouldn't", "hit people", 5, 5);
  auto low_consensus = mic("m2", "You shouldn't", "spit", 5, 4);
  auto low_severity = mic("m3", "You shouldn't", "litter", 4, 5);
  auto sc_kept = social("s1", "It's bad", "to run red lights", 5, 2);
  auto sc_low_pressure = social("s2", "It's bad", "to be late", 5, 1);
  auto sc_dup = social("s3", "You shouldn't", "hit people", 5, 2);
  auto out = select_safety_rots({kept, low_consensus, low_severity}, {sc_kept, sc_low_pressure, sc_dup});
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "m1");
  CHECK(out[1].id == "s1");
  CHECK(safety_statement(out[1]) == "It's bad to run red lights.");
}

TEST_CASE("index normalizes, persists and reloads") {
  auto index = SafetyRoTIndex::from_entries({{"a", "A.", {3.0f, 4.0f}}, {"b", "B.", {0.0f, 2.0f}}, {"c", "C.", {-1.0f, 0.0f}}});
  REQUIRE(index.size() == 3);
  CHECK(index.dimension() == 2);
  CHECK(index.entries()[0].vector[0] == doctest::Approx(0.6f));
  CHECK(index.entries()[0].vector[1] == doctest::Approx(0.8f));
  for (const auto& e : index.entries()) CHECK(l2_norm(e.vector) == doctest::Approx(1.0).epsilon(1e-6));

  TempDir tmp;
  index.save(tmp / "index.jsonl");
  auto back = SafetyRoTIndex::load(tmp / "index.jsonl");
  CHECK(back.entries() == index.entries());

  CHECK_THROWS_AS(SafetyRoTIndex::from_entries({{"a", "A.", {1.0f, 0.0f}}, {"b", "B.", {1.0f}}}), InputError);
  CHECK_THROWS_AS(SafetyRoTIndex::from_entries({{"a", "A.", {1.0f, 0.0f}}, {"a", "B.", {0.0f, 1.0f}}}), InputError);
  CHECK_THROWS_AS(SafetyRoTIndex::from_entries({{"a", "A.", {0.0f, 0.0f}}}), InputError);
}

TEST_CASE("search ranks by cosine, breaks ties by id and caps k") {
  auto index = SafetyRoTIndex::from_entries(
      {{"z", "Z.", {1.0f, 0.0f}}, {"y", "Y.", {2.0f, 0.0f}}, {"x", "X.", {0.0f, 1.0f}}, {"w", "W.", {1.0f, 1.0f}}});
  const Embedding q = {1.0f, 0.0f};
  auto top = index.search(q, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].rot_id == "y");  // tie with z at similarity 1
  CHECK(top[1].rot_id == "z");
  CHECK(top[2].rot_id == "w");
  CHECK(top[0].similarity == doctest::Approx(1.0));
  CHECK(index.search(q, 10).size() == 4);
}

TEST_CASE("hashing embedder: a query equal to an indexed statement ranks first with similarity 1") {
  HashingEmbedder embedder(256);
  std::vector<RoTRecord> rots = {social("s1", "It's bad", "to run red lights", 5, 2),
                                 social("s2", "You shouldn't", "steal from stores", 5, 2),
                                 social("s3", "It's wrong", "to hurt animals", 5, 2)};
  auto index = SafetyRoTIndex::build(rots, embedder, 2);
  REQUIRE(index.size() == 3);
  auto hits = retrieve_topk(index, "You shouldn't steal from stores.", embedder, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].text == "You shouldn't steal from stores.");
  CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-6));

  auto red = retrieve_topk(index, "Running red lights is bad and dangerous.", embedder, 5);
  CHECK(red.size() == 3);
  CHECK(red[0].text == "It's bad to run red lights.");
}

TEST_CASE("property: search equals a brute-force sort") {
  Rng rng(21);
  std::vector<SafetyEntry> entries;
  for (int i = 0; i < 300; ++i) {
    Embedding v(8);
    // coarse values force frequent exact ties
    for (auto& x : v) x = static_cast<float>(static_cast<int>(rng.index(5)) - 2);
    if (l2_norm(v) == 0.0) v[0] = 1.0f;
    entries.push_back({"id" + std::to_string(1000 + (i * 37) % 300), "t", v});
  }
  auto index = SafetyRoTIndex::from_entries(entries);
  for (int qi = 0; qi < 20; ++qi) {
    Embedding q(8);
    for (auto& x : q) x = static_cast<float>(static_cast<int>(rng.index(5)) - 2);
    if (l2_norm(q) == 0.0) q[1] = 1.0f;
    const auto qn = normalize(q);
    std::vector<std::pair<double, std::string>> oracle;
    for (const auto& e : index.entries()) oracle.emplace_back(dot(e.vector, qn), e.rot_id);
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    auto got = index.search(q, 25);
    REQUIRE(got.size() == 25);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].rot_id == oracle[i].second);
      CHECK(got[i].similarity == oracle[i].first);
    }
  }
}

TEST_CASE("S_MA is the minimum agreement over the retrieved RoTs") {
  CHECK(min_agreement(std::vector<double>{0.2, -0.4, 0.9, 0.1, 0.3}) == -0.4);
  CHECK(min_agreement(std::vector<double>{1, 1, 1, 1, 1}) == 1.0);
  CHECK_THROWS_AS(min_agreement(std::vector<double>{}), InputError);

  TableEmbedder embedder;
  embedder.table = {{"A.", {1, 0, 0}}, {"B.", {0.9f, 0.1f, 0}}, {"C.", {0, 1, 0}}, {"answer", {1, 0.05f, 0}}};
  auto index = SafetyRoTIndex::from_entries(
      {{"a", "A.", embedder.table["A."]}, {"b", "B.", embedder.table["B."]}, {"c", "C.", embedder.table["C."]}});
  MockScorer scorer;
  scorer.add({"q", "answer", "A."}, AgreementVerdict::from_probabilities(0.8, 0.2, 0.0));
  scorer.add({"q", "answer", "B."}, AgreementVerdict::from_probabilities(0.1, 0.2, 0.7));
  scorer.add({"q", "answer", "C."}, AgreementVerdict::from_probabilities(0.0, 0.0, 1.0));

  auto s2 = safety_score("q", "answer", index, embedder, scorer, 2);
  REQUIRE(s2.retrieved.size() == 2);
  CHECK(s2.s_ma == doctest::Approx(-0.6));
  CHECK(s2.agreement.size() == 2);
  auto s3 = safety_score("q", "answer", index, embedder, scorer, 3);
  CHECK(s3.s_ma == -1.0);
  auto s1 = safety_score("q", "answer", index, embedder, scorer, 1);
  CHECK(s1.s_ma == doctest::Approx(0.8));
}
