#include <doctest.h>

#include <cmath>

#include "moraldial/agreement.hpp"
#include "moraldial/error.hpp"
#include "moraldial/random.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::TempDir;

TEST_CASE("agreement_score examples") {
  CHECK(agreement_score(1, 0, 0) == 1.0);
  CHECK(agreement_score(0, 1, 0) == 0.0);
  CHECK(agreement_score(0, 0, 1) == -1.0);
  CHECK(agreement_score(0.6, 0.3, 0.1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("agreement_score rejects malformed triples") {
  CHECK_THROWS_AS(agreement_score(0.5, 0.5, 0.5), InputError);
  CHECK_THROWS_AS(agreement_score(-0.1, 0.6, 0.5), InputError);
  CHECK_THROWS_AS(agreement_score(NAN, 0.5, 0.5), InputError);
  CHECK_THROWS_AS(agreement_score(0.5, 0.2, 0.2999), InputError);
  // inside the tolerance: renormalized
  CHECK(agreement_score(0.5, 0.2, 0.2999995) == doctest::Approx(0.2000005 / 0.9999995).epsilon(1e-12));
}

TEST_CASE("property: antisymmetry and range over random triples") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double pa = lo, pn = hi - lo, pd = 1.0 - hi;
    const double as = agreement_score(pa, pn, pd);
    CHECK(as >= -1.0);
    CHECK(as <= 1.0);
    CHECK(agreement_score(pd, pn, pa) == -as);

    // denormalized within the tolerance, so the renormalizing path runs
    const double scale = 1.0 + (rng.uniform() - 0.5) * 1e-6;
    const double as2 = agreement_score(pa * scale, pn * scale, pd * scale);
    CHECK(std::abs(as2) <= 1.0);
    CHECK(agreement_score(pd * scale, pn * scale, pa * scale) == -as2);
  }
}

TEST_CASE("mock scorer") {
  MockScorer mock;
  mock.add({"q1", "a1", "r1"}, AgreementVerdict::from_probabilities(0.9, 0.08, 0.02));
  SUBCASE("fixture triple") {
    auto v = mock.score("q1", "a1", "r1");
    CHECK(v.p_agree == 0.9);
    CHECK(v.as_score == doctest::Approx(0.88).epsilon(1e-12));
  }
  SUBCASE("unknown triple falls back to neutral") {
    auto v = mock.score("q1", "a1", "r2");
    CHECK(v == AgreementVerdict::from_probabilities(0, 1, 0));
    CHECK(v.as_score == 0.0);
  }
  SUBCASE("empty answer") { CHECK_THROWS_AS(mock.score("q1", "", "r1"), InputError); }
  SUBCASE("the question is part of the key") { CHECK(mock.score("q2", "a1", "r1").as_score == 0.0); }
}

TEST_CASE("mock scorer loads fixture files") {
  TempDir tmp;
  testing::write_file(tmp / "m.jsonl",
                      "{\"question\":\"q1\",\"answer\":\"a1\",\"rot\":\"r1\",\"p_agree\":0.9,\"p_neutral\":0.08,"
                      "\"p_disagree\":0.02}\n");
  std::vector<std::filesystem::path> files = {tmp / "m.jsonl"};
  auto mock = MockScorer::load(files);
  CHECK(mock.size() == 1);
  CHECK(mock.score("q1", "a1", "r1").as_score == doctest::Approx(0.88));
}

TEST_CASE("score_batch preserves order, marks failures and equals the element-wise loop") {
  MockScorer mock;
  Rng rng(3);
  std::vector<ScoreRequest> items;
  for (int i = 0; i < 1000; ++i) {
    ScoreRequest r{"q" + std::to_string(i % 7), "a" + std::to_string(i), "r" + std::to_string(i % 13)};
    const double x = rng.uniform(), y = rng.uniform() * (1 - x);
    if (i % 3 == 0) mock.add(r, AgreementVerdict::from_probabilities(x, 1 - x - y, y));
    items.push_back(r);
  }
  auto batch = mock.score_batch(items);
  REQUIRE(batch.size() == items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    REQUIRE(batch[i].ok());
    CHECK(*batch[i].verdict == mock.score(items[i]));
  }

  std::span<const ScoreRequest> all(items);
  auto first = mock.score_batch(all.subspan(0, 400));
  auto second = mock.score_batch(all.subspan(400));
  for (std::size_t i = 0; i < items.size(); ++i) {
    CHECK(*batch[i].verdict == *(i < 400 ? first[i] : second[i - 400]).verdict);
  }

  std::vector<ScoreRequest> three = {{"q", "a", "r"}, {"q", "", "r"}, {"q1", "a1", "r1"}};
  auto mixed = mock.score_batch(three);
  REQUIRE(mixed.size() == 3);
  CHECK(mixed[0].ok());
  CHECK_FALSE(mixed[1].ok());
  CHECK_FALSE(mixed[1].error.empty());
  CHECK(mixed[2].ok());

  CHECK_THROWS_AS(mock.score_batch(std::span<const ScoreRequest>{}), InputError);
}

TEST_CASE("verdict wire parsing") {
  auto v = verdict_from_wire({{"p_agree", 0.6}, {"p_neutral", 0.3}, {"p_disagree", 0.1}});
  CHECK(v.as_score == doctest::Approx(0.5));
  CHECK_THROWS_AS(verdict_from_wire({{"p_agree", 0.6}, {"p_neutral", 0.3}}), ProtocolError);
  CHECK_THROWS_AS(verdict_from_wire({{"p_agree", "0.6"}, {"p_neutral", 0.3}, {"p_disagree", 0.1}}), ProtocolError);
  CHECK_THROWS_AS(verdict_from_wire({{"p_agree", 0.9}, {"p_neutral", 0.3}, {"p_disagree", 0.1}}), ProtocolError);
  CHECK(to_wire({"q", "a", "r"}) == nlohmann::json{{"question", "q"}, {"answer", "a"}, {"rot", "r"}});
}
