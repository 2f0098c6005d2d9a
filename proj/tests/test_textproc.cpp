#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "textproc.hpp"

using namespace geoinfer;

namespace {
std::vector<std::string> tok(std::string_view text, TokenizerConfig cfg = {}) {
  return normalize_tokenize(text, cfg);
}
}  // namespace

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
  CHECK(tok("Hello, WORLD!!") == std::vector<std::string>{"hello", "world"});
  CHECK(tok("foo_bar baz-qux") == std::vector<std::string>{"foo", "bar", "baz", "qux"});
  CHECK(tok("great2meet u2") == std::vector<std::string>{"great2meet", "u2"});
  CHECK(tok("") == std::vector<std::string>{});
  CHECK(tok("   \t\n  ") == std::vector<std::string>{});
}

TEST_CASE("tokenizer drops tokens below min_len") {
  CHECK(tok("a bb ccc") == std::vector<std::string>{"bb", "ccc"});
  TokenizerConfig cfg;
  cfg.min_len = 3;
  CHECK(tok("a bb ccc dddd", cfg) == std::vector<std::string>{"ccc", "dddd"});
  cfg.min_len = 1;
  CHECK(tok("a bb", cfg) == std::vector<std::string>{"a", "bb"});
}

TEST_CASE("tokenizer drops @mentions") {
  CHECK(tok("@alice hi there") == std::vector<std::string>{"hi", "there"});
  CHECK(tok("hey @bob_the_builder what's up") ==
        std::vector<std::string>{"hey", "what", "up"});

  TokenizerConfig keep;
  keep.remove_mentions = false;
  CHECK(tok("@alice hi", keep) == std::vector<std::string>{"alice", "hi"});
}

TEST_CASE("tokenizer drops URLs") {
  CHECK(tok("look http://example.com/x?y=1 here") ==
        std::vector<std::string>{"look", "here"});
  CHECK(tok("HTTPS://T.CO/abc and www.site.org too") ==
        std::vector<std::string>{"and", "too"});

  TokenizerConfig keep;
  keep.remove_urls = false;
  const auto kept = tok("go www.site.org now", keep);
  CHECK(kept.size() > 2);
}

TEST_CASE("tokenizer strips hashtag markers but keeps the tag") {
  CHECK(tok("#tacos are #1") == std::vector<std::string>{"tacos", "are"});
}

TEST_CASE("tokenizer keeps multi-byte characters intact") {
  const auto t = tok("Caf\xc3\xa9 na\xc3\xafve");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == "caf\xc3\xa9");
  CHECK(t[1] == "na\xc3\xafve");
}

TEST_CASE("apostrophes split words") {
  CHECK(tok("don't it's") == std::vector<std::string>{"don", "it"});
}

TEST_CASE("stopword removal is opt-in") {
  CHECK(is_stopword("the"));
  CHECK(is_stopword("and"));
  CHECK_FALSE(is_stopword("pizza"));

  CHECK(tok("the best pizza in the city") ==
        std::vector<std::string>{"the", "best", "pizza", "in", "the", "city"});

  TokenizerConfig cfg;
  cfg.remove_stopwords = true;
  CHECK(tok("the best pizza in the city", cfg) ==
        std::vector<std::string>{"best", "pizza", "city"});
}

TEST_CASE("dedup keeps the first record per exact text") {
  std::vector<Record> records(4);
  records[0] = {0, "a", {1.0, 1.0}, "same text"};
  records[1] = {1, "b", {2.0, 2.0}, "different"};
  records[2] = {2, "c", {3.0, 3.0}, "same text"};
  records[3] = {3, "d", {4.0, 4.0}, "Same Text"};  // case matters

  const auto kept = dedup_corpus(records);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].record_id == 0);
  CHECK(kept[1].record_id == 1);
  CHECK(kept[2].record_id == 3);
}

TEST_CASE("vocabulary keeps tokens at or above min_df in first-seen order") {
  const std::vector<std::vector<std::string>> corpus = {
      {"pizza", "tacos", "pizza"},  // repeated in-doc counts once toward df
      {"tacos", "sushi"},
      {"pizza", "sushi"},
      {"ramen"},
  };
  const auto vocab = Vocabulary::build(corpus, 2);

  REQUIRE(vocab.size() == 3);
  CHECK(vocab.id_of("pizza") == 0);
  CHECK(vocab.id_of("tacos") == 1);
  CHECK(vocab.id_of("sushi") == 2);
  CHECK(vocab.id_of("ramen") == -1);

  CHECK(vocab.doc_freq(0) == 2);  // two documents, the in-doc repeat is one
  CHECK(vocab.doc_freq(1) == 2);
  CHECK(vocab.doc_freq(2) == 2);
  CHECK(vocab.token_of(1) == "tacos");
}

TEST_CASE("vocabulary build fails when nothing survives") {
  const std::vector<std::vector<std::string>> corpus = {{"one"}, {"two"}};
  CHECK_NOTHROW(Vocabulary::build(corpus, 1));
  try {
    Vocabulary::build(corpus, 2);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_vocabulary);
  }
}

TEST_CASE("vectorize counts in-vocabulary tokens with sorted entries") {
  const std::vector<std::vector<std::string>> corpus = {{"aa", "bb"}, {"aa", "cc"}, {"bb", "cc"}};
  const auto vocab = Vocabulary::build(corpus, 1);

  const std::vector<std::string> doc = {"cc", "aa", "cc", "zz", "cc", "aa"};
  const FeatureVector x = vectorize(doc, vocab);

  REQUIRE(x.entries.size() == 2);
  CHECK(x.entries[0] == std::pair<int32_t, int32_t>{0, 2});  // aa
  CHECK(x.entries[1] == std::pair<int32_t, int32_t>{2, 3});  // cc
  CHECK(x.total() == 5);
  CHECK_FALSE(x.empty());

  CHECK(vectorize(std::vector<std::string>{"zz"}, vocab).empty());
}

TEST_CASE("from_parts reassembles a vocabulary with aliases") {
  auto vocab = Vocabulary::from_parts({"good", "bad"}, {10, 4}, {{"goood", 0}, {"baad", 1}});
  CHECK(vocab.size() == 2);
  CHECK(vocab.id_of("good") == 0);
  CHECK(vocab.id_of("goood") == 0);
  CHECK(vocab.id_of("baad") == 1);
  CHECK(vocab.doc_freq(0) == 10);

  const auto aliases = vocab.aliases_sorted();
  REQUIRE(aliases.size() == 2);
  CHECK(aliases[0].first == "baad");
  CHECK(aliases[1].first == "goood");

  const std::vector<std::string> doc = {"good", "goood", "goood"};
  const FeatureVector x = vectorize(doc, vocab);
  REQUIRE(x.entries.size() == 1);
  CHECK(x.entries[0] == std::pair<int32_t, int32_t>{0, 3});
}

TEST_CASE("from_parts validates its input") {
  CHECK_THROWS_AS(Vocabulary::from_parts({"a", "a"}, {1, 1}, {}), Error);
  CHECK_THROWS_AS(Vocabulary::from_parts({"a"}, {1, 2}, {}), Error);
  CHECK_THROWS_AS(Vocabulary::from_parts({"a"}, {1}, {{"b", 3}}), Error);
  CHECK_THROWS_AS(Vocabulary::from_parts({"a"}, {1}, {{"a", 0}}), Error);
}

TEST_CASE("vocabulary hash tracks content") {
  const auto v1 = Vocabulary::from_parts({"a", "b"}, {1, 2}, {});
  const auto v2 = Vocabulary::from_parts({"a", "b"}, {1, 2}, {});
  const auto v3 = Vocabulary::from_parts({"a", "b"}, {1, 3}, {});
  const auto v4 = Vocabulary::from_parts({"a", "b"}, {1, 2}, {{"c", 0}});
  const auto v5 = Vocabulary::from_parts({"b", "a"}, {2, 1}, {});

  CHECK(v1.hash() == v2.hash());
  CHECK(v1.hash() != v3.hash());
  CHECK(v1.hash() != v4.hash());
  CHECK(v1.hash() != v5.hash());
}
