#include <algorithm>
#include <map>

#include "doctest.h"
#include "swifm/corpus.hpp"
#include "swifm/rng.hpp"
#include "testutil.hpp"

using namespace swifm;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
  CHECK(tokenize("The button is HARD to push!") ==
        std::vector<std::string>{"the", "button", "is", "hard", "to", "push"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("don't   stop") == std::vector<std::string>{"don", "t", "stop"});
  CHECK(tokenize("a+b=c42") == std::vector<std::string>{"a", "b", "c42"});
  CHECK(tokenize("!!??") == std::vector<std::string>{});
}

TEST_CASE("tokenize is idempotent on its own tokens") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    for (int i = 0; i < 40; ++i) {
      text.push_back(static_cast<char>(32 + rng.next_below(95)));
    }
    for (const auto& token : tokenize(text)) {
      CHECK(tokenize(token) == std::vector<std::string>{token});
    }
  }
}

TEST_CASE("build_vocab orders by count then lexicographically") {
  std::vector<std::vector<std::string>> docs = {{"a", "b", "a"}, {"b", "c"}};

  Vocabulary v1 = build_vocab(docs, 1);
  REQUIRE(v1.size() == 3);
  CHECK(v1.word_to_id.at("a") == 0);
  CHECK(v1.word_to_id.at("b") == 1);
  CHECK(v1.word_to_id.at("c") == 2);
  CHECK(v1.counts == std::vector<std::int64_t>{2, 2, 1});

  Vocabulary v2 = build_vocab(docs, 2);
  REQUIRE(v2.size() == 2);
  CHECK(v2.word_to_id.at("a") == 0);
  CHECK(v2.word_to_id.at("b") == 1);

  CHECK_THROWS(build_vocab({}, 1));
  CHECK_THROWS(build_vocab(docs, 5));
  CHECK_THROWS(build_vocab(docs, 0));
}

TEST_CASE("build_vocab is deterministic") {
  std::vector<std::vector<std::string>> docs;
  Rng rng(5);
  for (int d = 0; d < 30; ++d) {
    std::vector<std::string> doc;
    for (int i = 0; i < 20; ++i) {
      doc.push_back("w" + std::to_string(rng.next_below(40)));
    }
    docs.push_back(doc);
  }
  Vocabulary a = build_vocab(docs, 2);
  Vocabulary b = build_vocab(docs, 2);
  CHECK(a.id_to_word == b.id_to_word);
  CHECK(a.counts == b.counts);
}

TEST_CASE("encode drops OOV and preserves order") {
  std::vector<std::vector<std::string>> docs = {{"a", "a"}, {"b", "b"}};
  Vocabulary vocab = build_vocab(docs, 1);
  CHECK(encode(vocab, {"a", "zzz", "b"}) == std::vector<std::int32_t>{0, 1});
  CHECK(encode(vocab, {"zzz"}) == std::vector<std::int32_t>{});
  CHECK(encode(vocab, {"b", "a", "b"}) == std::vector<std::int32_t>{1, 0, 1});
}

TEST_CASE("decode(encode(s)) round-trips in-vocabulary sequences") {
  std::vector<std::vector<std::string>> corpus;
  Rng rng(17);
  for (int d = 0; d < 20; ++d) {
    std::vector<std::string> doc;
    for (int i = 0; i < 10; ++i) doc.push_back("w" + std::to_string(rng.next_below(15)));
    corpus.push_back(doc);
  }
  Vocabulary vocab = build_vocab(corpus, 1);
  for (const auto& doc : corpus) {
    auto ids = encode(vocab, doc);
    CHECK(decode(vocab, ids) == doc);
  }
}

TEST_CASE("load_tsv parses records and reports bad lines") {
  testutil::TempDir dir;

  SUBCASE("well-formed with CRLF and blank lines") {
    testutil::write_file(dir.file("ok.tsv"),
                         "great phone\t1\r\n\nbad battery\t0\nwith\ttab\t1\n");
    auto records = load_tsv(dir.file("ok.tsv"));
    REQUIRE(records.size() == 3);
    CHECK(records[0].first == "great phone");
    CHECK(records[0].second == 1);
    CHECK(records[1].first == "bad battery");
    CHECK(records[1].second == 0);
    CHECK(records[2].first == "with\ttab");  // label split on the last tab
    CHECK(records[2].second == 1);
  }

  SUBCASE("label out of range names the line") {
    testutil::write_file(dir.file("bad.tsv"), "fine\t1\nbad\t2\n");
    CHECK_THROWS_WITH_AS(load_tsv(dir.file("bad.tsv")),
                         doctest::Contains(":2:"), std::runtime_error);
  }

  SUBCASE("missing tab names the line") {
    testutil::write_file(dir.file("notab.tsv"), "fine\t1\n\n\nno label here\n");
    CHECK_THROWS_WITH_AS(load_tsv(dir.file("notab.tsv")),
                         doctest::Contains(":4:"), std::runtime_error);
  }

  SUBCASE("missing file") { CHECK_THROWS(load_tsv(dir.file("absent.tsv"))); }
}

namespace {

std::vector<LabeledDoc> balanced_docs(std::size_t n_pos, std::size_t n_neg) {
  std::vector<LabeledDoc> docs;
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    LabeledDoc doc;
    doc.tokens = {static_cast<std::int32_t>(i)};  // unique token marks identity
    doc.label = i < n_pos ? 1 : 0;
    docs.push_back(doc);
  }
  return docs;
}

std::size_t count_pos(const std::vector<LabeledDoc>& docs) {
  return static_cast<std::size_t>(
      std::count_if(docs.begin(), docs.end(), [](const auto& d) { return d.label == 1; }));
}

}  // namespace

TEST_CASE("split stratifies 2000 balanced docs into 1400/200/400") {
  auto docs = balanced_docs(1000, 1000);
  SplitSpec spec{0.7, 0.1, 0.2, 9};
  Split parts = split(docs, spec);
  CHECK(parts.train.size() == 1400);
  CHECK(parts.valid.size() == 200);
  CHECK(parts.test.size() == 400);
  CHECK(count_pos(parts.train) == 700);
  CHECK(count_pos(parts.valid) == 100);
  CHECK(count_pos(parts.test) == 200);
}

TEST_CASE("split is deterministic per seed and seed-sensitive") {
  auto docs = balanced_docs(1000, 1000);
  SplitSpec spec{0.7, 0.1, 0.2, 123};
  Split a = split(docs, spec);
  Split b = split(docs, spec);
  auto ids = [](const std::vector<LabeledDoc>& part) {
    std::vector<std::int32_t> out;
    for (const auto& d : part) out.push_back(d.tokens[0]);
    return out;
  };
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.valid) == ids(b.valid));
  CHECK(ids(a.test) == ids(b.test));

  spec.seed = 124;
  Split c = split(docs, spec);
  CHECK(ids(a.train) != ids(c.train));
}

TEST_CASE("split partitions the input multiset") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 10 + rng.next_below(200);
    std::vector<LabeledDoc> docs;
    for (std::size_t i = 0; i < n; ++i) {
      docs.push_back({{static_cast<std::int32_t>(i)}, static_cast<int>(rng.next_below(2))});
    }
    Split parts = split(docs, SplitSpec{0.7, 0.1, 0.2, rng.next_u64()});

    std::vector<std::int32_t> seen;
    for (const auto* part : {&parts.train, &parts.valid, &parts.test}) {
      for (const auto& d : *part) seen.push_back(d.tokens[0]);
    }
    std::sort(seen.begin(), seen.end());
    REQUIRE(seen.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == static_cast<std::int32_t>(i));
  }
}

TEST_CASE("split validates its inputs") {
  auto docs = balanced_docs(3, 3);
  CHECK_THROWS_AS(split(docs, SplitSpec{0.7, 0.1, 0.2, 1}), std::invalid_argument);
  auto enough = balanced_docs(10, 10);
  CHECK_THROWS_AS(split(enough, SplitSpec{0.7, 0.2, 0.2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(split(enough, SplitSpec{1.0, 0.0, 0.0, 1}), std::invalid_argument);
}

TEST_CASE("vocabulary file round trip") {
  testutil::TempDir dir;
  std::vector<std::vector<std::string>> docs = {{"b", "b", "b"}, {"a", "a", "c"}};
  Vocabulary vocab = build_vocab(docs, 1);
  save_vocab(vocab, dir.file("v.vocab"));
  Vocabulary loaded = load_vocab(dir.file("v.vocab"));
  CHECK(loaded.id_to_word == vocab.id_to_word);
  CHECK(loaded.counts == vocab.counts);
  CHECK(loaded.word_to_id.at("b") == 0);

  testutil::write_file(dir.file("bad.vocab"), "a\t1\t3\n");
  CHECK_THROWS(load_vocab(dir.file("bad.vocab")));
}
