#include <doctest.h>

#include "primal/corpus.hpp"
#include "primal/errors.hpp"
#include "primal/synth.hpp"
#include "primal/utf8.hpp"
#include "test_util.hpp"

using namespace primal;

namespace {

std::string record(const std::string& id, const std::string& surface,
                   const std::vector<std::pair<std::string, int>>& senses,
                   int gold_at = -1) {
  std::string senses_json;
  for (size_t i = 0; i < senses.size(); ++i) {
    if (i) senses_json += ",";
    senses_json += R"({"id":")" + id + "_s" + std::to_string(i + 1) + R"(","description":")" +
                   senses[i].first + R"(","listed_position":)" +
                   std::to_string(senses[i].second);
    if (static_cast<int>(i) == gold_at) senses_json += R"(,"gold_primal":true)";
    senses_json += "}";
  }
  return R"({"id":")" + id + R"(","surface":")" + surface + R"(","senses":[)" + senses_json +
         "]}";
}

}  // namespace

TEST_CASE("load_corpus keeps multi-sense records and counts single-sense drops") {
  std::string text = record("e1", "ab", {{"first sense", 1}, {"other sense", 2}}) + "\n" +
                     record("e2", "cd", {{"only sense", 1}}) + "\n" +
                     record("e3", "ef", {{"one", 2}, {"two", 1}, {"three", 3}}) + "\n";
  testutil::TempFile f(text);
  LoadReport report;
  auto exprs = load_corpus(f.path(), &report);
  CHECK(exprs.size() == 2);
  CHECK(report.dropped_single_sense == 1);
  CHECK(exprs[0].id == "e1");
  // senses arrive sorted by listed_position
  CHECK(exprs[1].senses[0].listed_position == 1);
  CHECK(exprs[1].senses[0].description == U"two");
}

TEST_CASE("load_corpus accepts an empty file") {
  testutil::TempFile f("");
  LoadReport report;
  auto exprs = load_corpus(f.path(), &report);
  CHECK(exprs.empty());
  CHECK(report.loaded == 0);
}

TEST_CASE("load_corpus rejects a broken position permutation with the line number") {
  std::string good = record("e1", "ab", {{"x", 1}, {"y", 2}});
  std::string bad =
      R"({"id":"e2","surface":"cd","senses":[{"id":"a","description":"x","listed_position":1},)"
      R"({"id":"b","description":"y","listed_position":1},)"
      R"({"id":"c","description":"z","listed_position":2}]})";
  testutil::TempFile f(good + "\n" + bad + "\n");
  try {
    load_corpus(f.path());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("position permutation violated") != std::string::npos);
  }
}

TEST_CASE("load_corpus rejects duplicate expression ids") {
  std::string text = record("e1", "ab", {{"x", 1}, {"y", 2}}) + "\n" +
                     record("e1", "cd", {{"p", 1}, {"q", 2}}) + "\n";
  testutil::TempFile f(text);
  CHECK_THROWS_WITH_AS(load_corpus(f.path()), doctest::Contains("duplicate expression id"),
                       ParseError);
}

TEST_CASE("load_corpus rejects more than one gold sense") {
  std::string bad =
      R"({"id":"e1","surface":"ab","senses":[)"
      R"({"id":"a","description":"x","listed_position":1,"gold_primal":true},)"
      R"({"id":"b","description":"y","listed_position":2,"gold_primal":true}]})";
  testutil::TempFile f(bad + "\n");
  CHECK_THROWS_AS(load_corpus(f.path()), ParseError);
}

TEST_CASE("assign_weak_labels points at listed_position 1 and is idempotent") {
  std::string text = record("e1", "ab", {{"second", 2}, {"first", 1}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  REQUIRE(exprs.size() == 1);
  CHECK(exprs[0].senses[exprs[0].weak_label_index].description == U"first");

  assign_weak_labels(exprs);
  int once = exprs[0].weak_label_index;
  assign_weak_labels(exprs);
  CHECK(exprs[0].weak_label_index == once);
  CHECK(exprs[0].senses[once].listed_position == 1);
}

TEST_CASE("corpus_stats computes mean senses and mean description length") {
  std::string text =
      record("e1", "ab", {{"0123456789", 1}, {"0123456789", 2}}) + "\n" +
      record("e2", "cd",
             {{"0123456789", 1}, {"0123456789", 2}, {"0123456789", 3}, {"0123456789", 4}}) +
      "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  CorpusStats st = corpus_stats(exprs);
  CHECK(st.count == 2);
  CHECK(st.mean_senses == doctest::Approx(3.0));
  CHECK(st.mean_description_length == doctest::Approx(10.0));
}

TEST_CASE("corpus_stats averages description lengths within one expression") {
  std::string text =
      record("e1", "ab", {{"12345", 1}, {"0123456789", 2}, {"012345678901234", 3}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  CHECK(corpus_stats(exprs).mean_description_length == doctest::Approx(10.0));
}

TEST_CASE("corpus_stats rejects an empty list") {
  CHECK_THROWS_AS(corpus_stats({}), Error);
}

TEST_CASE("description lengths count Unicode scalar values") {
  // «ab» is 4 scalar values even though it is 6 UTF-8 bytes.
  std::string text = record("e1", "ab", {{"«ab»", 1}, {"wxyz", 2}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  CHECK(exprs[0].senses[0].description.size() == 4);
  CHECK(corpus_stats(exprs).mean_description_length == doctest::Approx(4.0));
}

TEST_CASE("build_vocab assigns indices after PAD and UNK") {
  std::string text = record("e1", "ab", {{"abab", 1}, {"abab", 2}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  Vocab v = build_vocab(exprs, 1);
  CHECK(v.size() == 4);  // PAD, UNK, a, b
  CHECK(v.lookup(U'a') >= 2);
  CHECK(v.lookup(U'b') >= 2);
  CHECK(v.lookup(U'z') == Vocab::kUnk);
}

TEST_CASE("build_vocab honors min_count") {
  std::string text = record("e1", "aa", {{"aab", 1}, {"aaa", 2}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  Vocab v = build_vocab(exprs, 2);
  CHECK(v.contains(U'a'));
  CHECK_FALSE(v.contains(U'b'));
  auto encoded = encode_text(v, U"b", 10);
  CHECK(encoded == std::vector<int>{Vocab::kUnk});
}

TEST_CASE("build_vocab is deterministic") {
  std::string text = record("e1", "ab", {{"the quick brown fox", 1}, {"jumps over", 2}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  Vocab v1 = build_vocab(exprs, 1);
  Vocab v2 = build_vocab(exprs, 1);
  CHECK(v1.chars() == v2.chars());
}

TEST_CASE("encode_text truncates and maps unknowns to UNK") {
  std::string text = record("e1", "ab", {{"ab", 1}, {"ba", 2}}) + "\n";
  testutil::TempFile f(text);
  auto exprs = load_corpus(f.path());
  Vocab v = build_vocab(exprs, 1);

  auto ids = encode_text(v, U"ab", 200);
  CHECK(ids.size() == 2);
  CHECK(ids[0] == v.lookup(U'a'));
  CHECK(ids[1] == v.lookup(U'b'));

  std::u32string long_text(250, U'a');
  CHECK(encode_text(v, long_text, 200).size() == 200);

  auto with_unk = encode_text(v, U"az", 200);
  CHECK(with_unk[0] == v.lookup(U'a'));
  CHECK(with_unk[1] == Vocab::kUnk);

  // length bound and index bound hold for arbitrary input
  for (int len : {1, 3, 7}) {
    auto out = encode_text(v, U"a«z»b", len);
    CHECK(out.size() == std::min<size_t>(5, static_cast<size_t>(len)));
    for (int idx : out) CHECK(idx < v.size());
  }
}

TEST_CASE("corpus split round-trips through save/load") {
  SynthSpec spec;
  spec.n_train = 12;
  spec.n_validation = 4;
  spec.n_test = 4;
  CorpusSplit corpus = generate_synthetic(spec, 99);
  testutil::TempFile f(corpus_to_jsonl(corpus));
  LoadReport report;
  CorpusSplit loaded = load_corpus_split(f.path(), &report);
  CHECK(loaded.train.size() == 12);
  CHECK(loaded.validation.size() == 4);
  CHECK(loaded.test.size() == 4);
  CHECK(corpus_to_jsonl(loaded) == corpus_to_jsonl(corpus));
}

TEST_CASE("validation and test splits require gold labels") {
  std::string with_split =
      record("e1", "ab", {{"x", 1}, {"y", 2}});
  with_split.insert(with_split.size() - 1, R"(,"split":"test")");
  testutil::TempFile f(with_split + "\n");
  CHECK_THROWS_WITH_AS(load_corpus_split(f.path()), doctest::Contains("lacks a gold label"),
                       Error);
}

TEST_CASE("generate_synthetic is a pure function of spec and seed") {
  SynthSpec spec;
  spec.n_train = 30;
  spec.n_validation = 5;
  spec.n_test = 5;
  CorpusSplit a = generate_synthetic(spec, 7);
  CorpusSplit b = generate_synthetic(spec, 7);
  CHECK(corpus_to_jsonl(a) == corpus_to_jsonl(b));
  CorpusSplit c = generate_synthetic(spec, 8);
  CHECK(corpus_to_jsonl(a) != corpus_to_jsonl(c));
}

TEST_CASE("generate_synthetic with first_prob 1 makes weak labels gold") {
  SynthSpec spec;
  spec.n_train = 50;
  spec.n_validation = 10;
  spec.n_test = 10;
  spec.first_prob = 1.0;
  CorpusSplit corpus = generate_synthetic(spec, 3);
  for (const auto* split : {&corpus.train, &corpus.validation, &corpus.test})
    for (const Expression& e : *split) {
      CHECK(e.weak_label_index == e.gold_index());
      CHECK(e.senses[static_cast<size_t>(e.weak_label_index)].listed_position == 1);
    }
}

TEST_CASE("generate_synthetic hits the first-position rate within tolerance") {
  SynthSpec spec;
  spec.n_train = 10000;
  spec.n_validation = 1;
  spec.n_test = 1;
  spec.first_prob = 0.44;
  CorpusSplit corpus = generate_synthetic(spec, 123);
  size_t gold_first = 0;
  for (const Expression& e : corpus.train)
    if (e.gold_index() == e.weak_label_index) ++gold_first;
  double rate = static_cast<double>(gold_first) / static_cast<double>(corpus.train.size());
  CHECK(rate > 0.42);
  CHECK(rate < 0.46);
}

TEST_CASE("generate_synthetic assigns weak labels at position 1 everywhere") {
  SynthSpec spec;
  spec.n_train = 1000;
  spec.n_validation = 1;
  spec.n_test = 1;
  CorpusSplit corpus = generate_synthetic(spec, 11);
  CHECK(corpus.train.size() == 1000);
  for (const Expression& e : corpus.train) {
    CHECK(e.weak_label_index == 0);
    CHECK(e.senses[0].listed_position == 1);
    CHECK(e.senses.size() >= 2);
  }
}

TEST_CASE("generate_synthetic validates its spec") {
  SynthSpec spec;
  spec.m_min = 1;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);
  SynthSpec spec2;
  spec2.first_prob = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec2, 1), Error);
}

TEST_CASE("utf8 decode rejects malformed input") {
  CHECK_THROWS_AS(utf8::decode("\xff"), Error);
  CHECK_THROWS_AS(utf8::decode("\xc3"), Error);          // truncated
  CHECK_THROWS_AS(utf8::decode("\xc0\xaf"), Error);      // overlong
  CHECK(utf8::decode("\xc2\xab") == std::u32string(U"\u00ab"));
  CHECK(utf8::encode(U"\u00abdef\u00bb") == "\xc2\xab" "def" "\xc2\xbb");
}
