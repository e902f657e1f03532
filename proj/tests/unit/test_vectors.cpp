#include <algorithm>
#include <set>
#include <sstream>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"
#include "alwb/vectors.hpp"
#include "doctest.h"

using namespace alwb;

namespace {

// Tokens "a" and "b" share one context distribution; every other centre
// token "w<i>" has its own private context words.
TokenStream planted_stream(std::uint64_t seed) {
  Rng rng(seed);
  TokenStream stream;
  for (int s = 0; s < 3000; ++s) {
    const auto pick = uniform_index(rng, 12);
    std::string centre;
    std::string ctx_prefix;
    if (pick < 2) {
      centre = pick == 0 ? "a" : "b";
      ctx_prefix = "shared";
    } else {
      centre = "w" + std::to_string(pick);
      ctx_prefix = "ctx" + std::to_string(pick);
    }
    std::vector<std::string> sent;
    for (int k = 0; k < 2; ++k) sent.push_back(ctx_prefix + std::to_string(uniform_index(rng, 4)));
    sent.push_back(centre);
    for (int k = 0; k < 2; ++k) sent.push_back(ctx_prefix + std::to_string(uniform_index(rng, 4)));
    stream.push_back(std::move(sent));
  }
  return stream;
}

SkipGramConfig small_config() {
  SkipGramConfig c;
  c.dim = 20;
  c.window = 3;
  c.epochs = 5;
  c.min_count = 1;
  c.seed = 11;
  return c;
}

std::multiset<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("skip-gram: shared contexts give similar vectors") {
  const auto table = train_skipgram(planted_stream(3), small_config());
  const Vector a = table.vector("a");
  const double ab = cosine(a, table.vector("b"));
  double others = 0.0;
  int count = 0;
  for (int i = 2; i < 12; ++i) {
    others += cosine(a, table.vector("w" + std::to_string(i)));
    ++count;
  }
  others /= count;
  CHECK(ab > others + 0.2);
}

TEST_CASE("skip-gram: loss per epoch does not increase") {
  const auto table = train_skipgram(planted_stream(5), small_config());
  REQUIRE(table.epoch_loss.size() == 5);
  for (std::size_t e = 1; e < table.epoch_loss.size(); ++e) CHECK(table.epoch_loss[e] <= table.epoch_loss[e - 1]);
}

TEST_CASE("skip-gram: degenerate vocabularies") {
  TokenStream one(20, std::vector<std::string>(5, "x"));
  auto cfg = small_config();
  const auto table = train_skipgram(one, cfg);
  CHECK(table.size() == 1);
  CHECK(table.contains("x"));

  cfg.min_count = 1000;
  CHECK_THROWS_WITH_AS(train_skipgram(planted_stream(1), cfg), "empty effective vocabulary", DataError);
  cfg = small_config();
  cfg.dim = 1;
  CHECK_THROWS_AS(train_skipgram(one, cfg), ConfigError);
}

TEST_CASE("skip-gram: min_count filters rare tokens and empty tokens are skipped") {
  TokenStream s{{"a", "b", "", "a"}, {"a", "c", "a"}};
  auto cfg = small_config();
  cfg.min_count = 2;
  const auto table = train_skipgram(s, cfg);
  CHECK(table.words() == std::vector<std::string>{"a"});
}

TEST_CASE("skip-gram: reference mode is bit-identical for a fixed seed") {
  const auto s = planted_stream(9);
  const auto t1 = train_skipgram(s, small_config());
  const auto t2 = train_skipgram(s, small_config());
  CHECK(t1 == t2);
  auto other = small_config();
  other.seed = 12;
  CHECK_FALSE(train_skipgram(s, other) == t1);
}

TEST_CASE("skip-gram: parallel mode trains every token") {
  auto cfg = small_config();
  cfg.threads = 3;
  const auto table = train_skipgram(planted_stream(4), cfg);
  CHECK(table.size() == 2 + 10 + 4 + 40);
  CHECK(table.vectors().allFinite());
}

TEST_CASE("embedding persistence round trip") {
  const auto t = train_skipgram(planted_stream(2), small_config());
  std::stringstream io;
  write_embeddings(io, t);
  std::string header;
  std::getline(io, header);
  CHECK(header == std::to_string(t.size()) + " 20");
  io.seekg(0);
  const auto back = read_embeddings(io);
  CHECK(back == t);

  std::istringstream bad("2 3\nx 1 2 3\n");
  CHECK_THROWS_AS(read_embeddings(bad), DataError);
}

TEST_CASE("char_ngrams") {
  CHECK(as_set(char_ngrams("at")) ==
        as_set({"a", "t", "^a", "at", "t$", "^at", "at$", "^at$", "^_t", "a_$"}));
  CHECK(as_set(char_ngrams("a")) == as_set({"a", "^a", "a$", "^a$"}));
  const auto aaa = char_ngrams("aaa");
  CHECK(std::count(aaa.begin(), aaa.end(), "a") == 3);
  NgramConfig only_bi{false, true, false, false, false};
  CHECK(as_set(char_ngrams("at", only_bi)) == as_set({"^a", "at", "t$"}));
}

TEST_CASE("lexical vectors") {
  const LexicalTable lex;
  const Vector k = lex.lexical_vector("kidney");
  CHECK(std::abs(k.norm() - 1.0) < 1e-9);
  CHECK(lex.lexical_vector("kidney") == k);
  CHECK(cosine(k, lex.lexical_vector("kidneys")) > cosine(k, lex.lexical_vector("warfarin")));
  // anagrams have different n-gram multisets
  CHECK_FALSE(lex.lexical_vector("ab") == lex.lexical_vector("ba"));

  LexicalConfig other;
  other.seed = 99;
  CHECK_FALSE(LexicalTable(other).lexical_vector("kidney") == k);
  CHECK(LexicalTable(LexicalConfig{}).ngram_vector("^ki") == lex.ngram_vector("^ki"));
}

TEST_CASE("lexical meta round trip") {
  LexicalConfig c;
  c.dim = 17;
  c.seed = 1234;
  c.ngrams.skipgrams = false;
  std::stringstream io;
  write_lexical_meta(io, LexicalTable(c));
  const auto back = read_lexical_meta(io);
  CHECK(back.config() == c);
  std::istringstream bad("lexical x 4 11111\n");
  CHECK_THROWS_AS(read_lexical_meta(bad), DataError);
}
