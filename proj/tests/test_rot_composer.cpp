#include <doctest.h>

#include <set>

#include "moraldial/rot_composer.hpp"
#include "moraldial/text.hpp"
#include "test_support.hpp"

using namespace moraldial;
using moraldial::testing::TempDir;

namespace {

RoTRecord neighbor(bool with_situation) {
  RoTRecord r;
  r.id = "n1";
  r.judgment = with_situation ? "it is okay" : "it is bad";
  r.action = "to interrupt your neighbor";
  if (with_situation) r.situation = "you are in an emergency";
  r.consensus = 4;
  r.source = Source::social_chem;
  return r;
}

// Hand-rolled generator: records with varied judgment/action/situation words.
RoTRecord random_record(Rng& rng, std::size_t i) {
  static const std::vector<std::string> judgments = {"It's bad", "It's good", "You should", "You shouldn't",
                                                     "It is rude", "It's okay"};
  static const std::vector<std::string> verbs = {"to help", "to ignore", "to call", "to thank", "to visit", "to tease"};
  static const std::vector<std::string> objects = {"your parents", "a stranger", "your boss", "the neighbors",
                                                   "old friends", "your coworkers"};
  static const std::vector<std::string> situations = {"you are tired", "they are sick", "it is late at night",
                                                      "nobody is watching", "you have time"};
  RoTRecord r;
  r.id = "g" + std::to_string(i);
  r.judgment = judgments[rng.index(judgments.size())];
  r.action = verbs[rng.index(verbs.size())] + " " + objects[rng.index(objects.size())];
  if (rng.bernoulli(0.7)) r.situation = situations[rng.index(situations.size())];
  r.consensus = 1 + static_cast<int>(rng.index(5));
  r.source = Source::social_chem;
  return r;
}

}  // namespace

TEST_CASE("compose_statement renders the situational template") {
  CHECK(compose_statement(neighbor(true), "given that").text ==
        "It is okay to interrupt your neighbor given that you are in an emergency.");
  CHECK(compose_statement(neighbor(false)).text == "It is bad to interrupt your neighbor.");
  auto with_if = compose_statement(neighbor(true), "if");
  CHECK(with_if.text.find(" if ") != std::string::npos);
  CHECK(with_if.has_situation);
}

TEST_CASE("vary_statement") {
  const auto base = compose_statement(neighbor(true), "given that");
  SUBCASE("p_drop = 1 drops the situation") {
    Rng rng(11);
    auto v = vary_statement(base, rng, {.p_drop = 1.0, .p_swap = 0.0});
    CHECK_FALSE(v.has_situation);
    CHECK(v.text == "It is okay to interrupt your neighbor.");
  }
  SUBCASE("p_swap = 1 moves the situation first") {
    Rng rng(11);
    auto v = vary_statement(base, rng, {.p_drop = 0.0, .p_swap = 1.0});
    CHECK(v.text == "Given that you are in an emergency, it is okay to interrupt your neighbor.");
  }
  SUBCASE("p_drop = p_swap = 0 is the identity") {
    Rng rng(11);
    CHECK(vary_statement(base, rng, {.p_drop = 0.0, .p_swap = 0.0}) == base);
  }
  SUBCASE("two draws are consumed whatever the outcome") {
    Rng a(5), b(5);
    vary_statement(compose_statement(neighbor(false)), a);
    b.next();
    b.next();
    CHECK(a.next() == b.next());
  }
}

TEST_CASE("property: composed and varied statements satisfy the invariants and parse back") {
  Rng gen(2024);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto r = random_record(gen, i);
    Rng rng(99, r.id);
    const auto conj = pick_conjunction(rng);
    const auto s = vary_statement(compose_statement(r, conj), rng);
    CAPTURE(s.text);
    CHECK(text::icontains(s.text, r.action));
    CHECK(text::icontains(s.text, r.judgment));
    CHECK(text::ends_sentence(s.text));
    CHECK(std::isupper(static_cast<unsigned char>(s.text[0])));

    const auto parsed = parse_statement(s.text);
    CHECK(text::iequals(parsed.main_clause, r.judgment + " " + r.action));
    CHECK(parsed.situation.has_value() == s.has_situation);
    if (s.has_situation) {
      CHECK(*parsed.situation == *r.situation);
      CHECK(*parsed.conjunction == conj);
      CHECK(parsed.clause_order == s.clause_order);
    }
  }
}

TEST_CASE("pretrain corpus: 1000 records split 800/100/100 and ids are partitioned") {
  Rng gen(1);
  std::vector<RoTRecord> records;
  for (std::size_t i = 0; i < 1000; ++i) {
    RoTRecord r;
    r.id = "p" + std::to_string(i);
    r.judgment = "It's good";
    r.action = "to do thing number " + std::to_string(i);
    if (gen.bernoulli(0.5)) r.situation = "you can";
    r.consensus = 3;
    r.source = Source::social_chem;
    records.push_back(r);
  }
  auto corpus = emit_pretrain_corpus(records, 7);
  CHECK(corpus.duplicates_removed == 0);
  CHECK(corpus.train.size() == 800);
  CHECK(corpus.dev.size() == 100);
  CHECK(corpus.test.size() == 100);
  std::set<std::string> ids;
  for (const auto* v : {&corpus.train_ids, &corpus.dev_ids, &corpus.test_ids}) ids.insert(v->begin(), v->end());
  CHECK(ids.size() == 1000);

  TempDir a, b;
  write_pretrain_corpus(a.path(), corpus);
  write_pretrain_corpus(b.path(), emit_pretrain_corpus(records, 7));
  for (auto name : {"pretrain.train.txt", "pretrain.dev.txt", "pretrain.test.txt"}) {
    CHECK(testing::read_file(a / name) == testing::read_file(b / name));
  }
  auto other = emit_pretrain_corpus(records, 8);
  CHECK(other.train != corpus.train);
}

TEST_CASE("pretrain corpus removes exact duplicates and tolerates empty input") {
  RoTRecord r;
  r.id = "d1";
  r.judgment = "It's bad";
  r.action = "to lie";
  r.consensus = 3;
  auto r2 = r;
  r2.id = "d2";
  auto corpus = emit_pretrain_corpus({r, r2}, 0);
  CHECK(corpus.duplicates_removed == 1);
  CHECK(corpus.train.size() + corpus.dev.size() + corpus.test.size() == 1);

  auto empty = emit_pretrain_corpus({}, 0);
  CHECK(empty.train.empty());
  TempDir tmp;
  write_pretrain_corpus(tmp.path(), empty);
  CHECK(std::filesystem::exists(tmp / "pretrain.test.txt"));
  CHECK(std::filesystem::file_size(tmp / "pretrain.test.txt") == 0);
}
