#include <doctest.h>

#include <algorithm>

#include "moraldial/error.hpp"
#include "moraldial/metrics.hpp"
#include "moraldial/random.hpp"

using namespace moraldial;

namespace {

MetricRecord record(std::string id, Split split) {
  MetricRecord r;
  r.question_id = std::move(id);
  r.split = split;
  return r;
}

}  // namespace

TEST_CASE("MR score examples") {
  auto a = mr_scores_from(-0.5, -0.4, -0.35);
  CHECK(a.s_mr == 0);
  CHECK(a.s_delta_mr == doctest::Approx(0.1));
  auto b = mr_scores_from(-0.5, 0.2);
  CHECK(b.s_mr == 1);
  CHECK(b.s_delta_mr == doctest::Approx(0.7));
  auto c = mr_scores_from(0.8, 0.8);
  CHECK(c.s_mr == 1);
  CHECK(c.s_delta_mr == 0.0);
}

TEST_CASE("property: S_MR depends only on the comparisons with lambda and the gap is exact") {
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const double s1 = rng.uniform() * 2 - 1, s2 = rng.uniform() * 2 - 1, lambda = rng.uniform() * 1.8 - 0.9;
    auto m = mr_scores_from(s1, s2, lambda);
    CHECK(m.s_mr == ((s1 < lambda && s2 < lambda) ? 0 : 1));
    CHECK(m.s_delta_mr == s2 - s1);
    CHECK(m.s_mr1 == s1);
    CHECK(m.s_mr2 == s2);
  }
}

TEST_CASE("metric helpers query the scorer") {
  MockScorer scorer;
  scorer.add({"q", "a", "rb"}, AgreementVerdict::from_probabilities(1, 0, 0));
  scorer.add({"q", "a", "ru"}, AgreementVerdict::from_probabilities(0, 0, 1));
  scorer.add({"q", "a2", "ru"}, AgreementVerdict::from_probabilities(0.7, 0.3, 0));
  scorer.add({"qn", "an", "ru"}, AgreementVerdict::from_probabilities(0, 0, 1));
  CHECK(me_score(scorer, "q", "a", "rb") == 1.0);
  auto mr = mr_scores(scorer, "q", "a", "a2", "ru");
  CHECK(mr.s_mr1 == -1.0);
  CHECK(mr.s_mr2 == doctest::Approx(0.7));
  CHECK(mr.s_mr == 1);
  CHECK(ril_score(scorer, "qn", "an", "ru") == -1.0);
}

TEST_CASE("aggregate examples") {
  auto r1 = record("1", Split::dev);
  r1.s_ma = 0.1;
  auto r2 = record("2", Split::dev);
  r2.s_ma = -0.1;
  auto report = aggregate({r1, r2});
  CHECK(report.splits["dev"].metrics["s_ma"].mean == 0.0);
  CHECK(display_value(report.splits["dev"].metrics["s_ma"].mean) == "0.0");

  std::vector<MetricRecord> mr;
  for (int v : {1, 1, 0, 1}) {
    auto r = record(std::to_string(mr.size()), Split::test);
    r.s_mr = v;
    mr.push_back(r);
  }
  auto rep = aggregate(mr);
  CHECK(display_value(rep.splits["test"].metrics["s_mr"].mean) == "75.0");
  CHECK(rep.splits["test"].records == 4);

  CHECK_THROWS_AS(aggregate({}), EmptyReportError);
}

TEST_CASE("display values") {
  CHECK(display_value(0.88) == "88.0");
  CHECK(display_value(-0.0001) == "0.0");
  CHECK(display_value(-0.275) == "-27.5");
  CHECK(display_value(0.06999999999999995) == "7.0");
  CHECK(display_value(1.0) == "100.0");
}

TEST_CASE("absent metrics are skipped, not zero-filled") {
  auto a = record("a", Split::dev);
  a.s_ril = 0.5;
  a.s_me = 0.2;
  auto b = record("b", Split::dev);
  b.s_me = 0.4;
  auto report = aggregate({a, b}, 3);
  CHECK(report.splits["dev"].metrics["s_ril"].count == 1);
  CHECK(report.splits["dev"].metrics["s_ril"].mean == 0.5);
  CHECK(report.splits["dev"].metrics["s_me"].mean == doctest::Approx(0.3));
  CHECK(report.splits["dev"].metrics.count("s_ma") == 0);
  CHECK(report.failed_sessions == 3);
  const auto table = render_table(report);
  CHECK(table.find("S_RIL") != std::string::npos);
  CHECK(table.find("50.0") != std::string::npos);
  CHECK(table.find("3") != std::string::npos);
}

TEST_CASE("property: aggregation is order independent") {
  Rng rng(12);
  std::vector<MetricRecord> records;
  for (int i = 0; i < 300; ++i) {
    auto r = record("r" + std::to_string(i), rng.bernoulli(0.5) ? Split::dev : Split::test);
    r.s_ma = rng.uniform() * 2 - 1;
    r.s_me = rng.uniform() * 2 - 1;
    auto m = mr_scores_from(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
    r.s_mr1 = m.s_mr1;
    r.s_mr2 = m.s_mr2;
    r.s_delta_mr = m.s_delta_mr;
    r.s_mr = m.s_mr;
    if (rng.bernoulli(0.3)) r.s_ril = rng.uniform() * 2 - 1;
    records.push_back(r);
  }
  const auto expected = nlohmann::json(aggregate(records)).dump();
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(records);
    CHECK(nlohmann::json(aggregate(records)).dump() == expected);
  }
}

TEST_CASE("record JSON omits absent metrics and round-trips") {
  auto r = record("x", Split::test);
  r.s_me = 0.25;
  r.s_mr = 0;
  auto j = nlohmann::json(r);
  CHECK(j.contains("s_me"));
  CHECK_FALSE(j.contains("s_ma"));
  CHECK(j.get<MetricRecord>() == r);
  CHECK(metric_value(r, "s_mr") == 0.0);
  CHECK_FALSE(metric_value(r, "s_ril").has_value());
}
