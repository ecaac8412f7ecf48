#include <doctest.h>

#include <algorithm>

#include "moraldial/corpus_ingest.hpp"
#include "moraldial/delimited.hpp"
#include "moraldial/error.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/rot_composer.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::data_dir;
using moraldial::testing::TempDir;
using moraldial::testing::write_file;

namespace {

RoTRecord valid_social_chem() {
  RoTRecord r;
  r.id = "sc";
  r.judgment = "It's bad";
  r.action = "to run red lights";
  r.consensus = 4;
  r.pressure = 2;
  r.source = Source::social_chem;
  return r;
}

}  // namespace

TEST_CASE("delimited parser handles quotes, doubled quotes and embedded newlines") {
  auto t = parse_delimited("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"multi\nline\",z\n\n", ',');
  REQUIRE(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].fields == std::vector<std::string>{"x, y", "say \"hi\""});
  CHECK(t.rows[0].line == 2);
  CHECK(t.rows[1].fields[0] == "multi\nline");
  CHECK(t.rows[1].line == 3);
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == -1);
}

TEST_CASE("slap row keeps its disagree alignment") {
  auto result = load_meta_samples(data_dir() / "ingest/mic_10.csv");
  auto it = std::find_if(result.records.begin(), result.records.end(), [](const MetaSample& s) { return s.id == "m01"; });
  REQUIRE(it != result.records.end());
  CHECK(it->question == "Should I slap my neighbor?");
  CHECK(it->answer == "Sure");
  CHECK(it->alignment == Alignment::disagree);
  CHECK(it->rot.judgment + " " + it->rot.action == "You shouldn't slap or punch others' face");
  CHECK(it->rot.consensus == 5);
  CHECK(it->rot.severity == 4);
  CHECK(it->rot.foundations == FoundationSet{Foundation::care});
  CHECK(it->split == Split::train);
  REQUIRE(it->revised_answer.has_value());
}

TEST_CASE("header-only file gives no samples") {
  auto result = load_meta_samples(data_dir() / "ingest/mic_header_only.csv");
  CHECK(result.records.empty());
  CHECK(result.rejections.empty());
}

TEST_CASE("two malformed consensus values give 8 samples and 2 rejections with line numbers") {
  auto result = load_meta_samples(data_dir() / "ingest/mic_10.csv");
  CHECK(result.records.size() == 8);
  REQUIRE(result.rejections.size() == 2);
  CHECK(result.rejections[0].line == 4);
  CHECK(result.rejections[1].line == 8);
  CHECK(result.rejections[0].reasons.at(0).find("consensus") != std::string::npos);
  // a quoted question containing the delimiter survives
  CHECK(std::any_of(result.records.begin(), result.records.end(),
                    [](const MetaSample& s) { return s.question == "Is it fine to eat meat, even on a fast day?"; }));
}

TEST_CASE("ingestion is lossless modulo rejections") {
  for (auto file : {"ingest/mic_10.csv", "flows/mic_50.csv", "e2e/mic.csv"}) {
    const auto table = read_delimited(data_dir() / file, ',');
    const auto result = load_meta_samples(data_dir() / file);
    CHECK(table.rows.size() == result.records.size() + result.rejections.size());
  }
  const auto table = read_delimited(data_dir() / "ingest/social_chem_5.tsv", '\t');
  const auto rots = load_socialchem_rots(data_dir() / "ingest/social_chem_5.tsv");
  CHECK(table.rows.size() == rots.records.size() + rots.rejections.size());
}

TEST_CASE("canonical JSONL round trip is stable") {
  TempDir tmp;
  auto meta = load_meta_samples(data_dir() / "ingest/mic_10.csv").records;
  jsonl::write(tmp / "meta.jsonl", meta);
  auto back = jsonl::read<MetaSample>(tmp / "meta.jsonl");
  CHECK(back == meta);
  jsonl::write(tmp / "again.jsonl", back);
  CHECK(testing::read_file(tmp / "meta.jsonl") == testing::read_file(tmp / "again.jsonl"));

  auto rots = load_socialchem_rots(data_dir() / "ingest/social_chem_5.tsv").records;
  jsonl::write(tmp / "sc.jsonl", rots);
  CHECK(jsonl::read<RoTRecord>(tmp / "sc.jsonl") == rots);
}

TEST_CASE("social-chem red light row composes to the plain statement") {
  auto result = load_socialchem_rots(data_dir() / "ingest/social_chem_5.tsv");
  auto it = std::find_if(result.records.begin(), result.records.end(), [](const RoTRecord& r) { return r.id == "sc1"; });
  REQUIRE(it != result.records.end());
  CHECK(compose_statement(*it).text == "It's bad to run red lights.");
  CHECK(it->pressure == 2);  // magnitude of -2
  CHECK(it->source == Source::social_chem);
}

TEST_CASE("social-chem fixture with one empty action gives 4 records") {
  auto result = load_socialchem_rots(data_dir() / "ingest/social_chem_5.tsv");
  CHECK(result.records.size() == 4);
  REQUIRE(result.rejections.size() == 1);
  CHECK(std::find(result.rejections[0].reasons.begin(), result.rejections[0].reasons.end(), "action is empty") !=
        result.rejections[0].reasons.end());
}

TEST_CASE("a missing required column is a configuration error") {
  TempDir tmp;
  write_file(tmp / "bad.csv", "id,Q,A\nx,q,a\n");
  CHECK_THROWS_AS(load_meta_samples(tmp / "bad.csv"), ConfigError);
}

TEST_CASE("column map overlay renames columns") {
  TempDir tmp;
  write_file(tmp / "renamed.tsv",
             "judgement\tthe_action\tagree\tpressure\n"
             "It's good\tto share\t4\t-2\n");
  auto schema = ColumnMap::from_json(
      {{"columns", {{"judgment", "judgement"}, {"action", "the_action"}, {"consensus", "agree"}, {"pressure", "pressure"}}}},
      ColumnMap::social_chem_default());
  schema.delimiter = '\t';
  auto result = load_socialchem_rots(tmp / "renamed.tsv", schema);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].consensus == 5);  // 0..4 upstream scale
  CHECK(result.records[0].pressure == 2);
}

TEST_CASE("validate_record") {
  SUBCASE("consensus 6 is out of range") {
    auto r = valid_social_chem();
    r.consensus = 6;
    auto v = validate_record(r);
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0] == "consensus out of range");
  }
  SUBCASE("valid record") { CHECK(validate_record(valid_social_chem()).ok()); }
  SUBCASE("every violation is reported") {
    auto r = valid_social_chem();
    r.consensus = 0;
    r.judgment = "";
    CHECK(validate_record(r).violations.size() == 2);
  }
  SUBCASE("mic records need foundations and severity") {
    auto r = valid_social_chem();
    r.source = Source::mic;
    r.pressure.reset();
    auto v = validate_record(r);
    CHECK(v.violations.size() == 2);
  }
}

TEST_CASE("rejections are appended to the sidecar") {
  TempDir tmp;
  auto result = load_meta_samples(data_dir() / "ingest/mic_10.csv");
  append_rejections(tmp / "rejections.jsonl", result.rejections);
  append_rejections(tmp / "rejections.jsonl", result.rejections);
  auto lines = jsonl::read_all(tmp / "rejections.jsonl");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].at("line") == 4);
}

TEST_CASE("rot ids ignore case and the final period") {
  CHECK(rot_id_for_text("It's bad to lie.") == rot_id_for_text("it's bad to lie"));
  CHECK(rot_id_for_text("It's bad to lie.") != rot_id_for_text("It's bad to steal."));
  auto [j, a] = split_rot_text("You shouldn't slap or punch others' face.");
  CHECK(j + " " + a == "You shouldn't slap or punch others' face");
}
