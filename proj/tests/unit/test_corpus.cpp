#include <sstream>

#include "alwb/corpus.hpp"
#include "alwb/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace alwb;

namespace {

Corpus parse(const std::string& s) {
  std::istringstream in(s);
  return read_conll(in);
}

}  // namespace

TEST_CASE("read_conll: two-token concept") {
  const auto c = parse("pain\tNN\tB-problem\nkillers\tNN\tI-problem\n");
  REQUIRE(c.size() == 1);
  CHECK(c.sentences[0].size() == 2);
  CHECK(c.totals == UnitCounts{1, 2, 1});
  CHECK(c.sentences[0].tokens[0].pos == "NN");
  CHECK(c.label_alphabet == std::vector<std::string>{"B-problem", "I-problem"});
}

TEST_CASE("read_conll: errors") {
  CHECK_THROWS_WITH_AS(parse(""), "empty input", DataError);
  CHECK_THROWS_WITH_AS(parse("\n\n"), "empty input", DataError);
  CHECK_THROWS_AS(parse("x\tO\ny\tI-problem\n"), DataError);
  CHECK_THROWS_AS(parse("x\tB-test\ny\tI-problem\n"), DataError);
  CHECK_THROWS_AS(parse("x\ta\tb\tO\n"), DataError);
  CHECK_THROWS_AS(parse("lonely\n"), DataError);
  CHECK_THROWS_AS(parse("x\tB-\n"), DataError);
}

TEST_CASE("read_conll: documents and dense seq ids") {
  const auto c = parse("# doc a\nx\tO\n\ny\tB-t\n# doc b\nz\tO\n\n\nw\tO\n");
  REQUIRE(c.size() == 4);
  CHECK(c.sentences[0].doc_id == "a");
  CHECK(c.sentences[1].doc_id == "a");
  CHECK(c.sentences[2].doc_id == "b");
  for (int i = 0; i < 4; ++i) CHECK(c.sentences[static_cast<std::size_t>(i)].seq_id == i);
  CHECK_FALSE(c.has_pos());
}

TEST_CASE("preprocess") {
  CHECK(preprocess("Blood") == "blood");
  CHECK(preprocess("81mg") == "<num>mg");
  CHECK(preprocess(",") == "");
  CHECK(preprocess("...") == "");
  CHECK(preprocess("3.5") == "<num>.<num>");
  CHECK(preprocess("x-ray") == "x-ray");
  CHECK(preprocess("B12") == preprocess("b7"));
}

TEST_CASE("extract_concepts") {
  using testing::make_sentence;
  const auto s1 = make_sentence({"a", "b", "c", "d"}, {"B-p", "I-p", "O", "B-t"});
  CHECK(extract_concepts(s1) == std::vector<ConceptSpan>{{"p", 0, 1}, {"t", 3, 3}});
  CHECK(extract_concepts(make_sentence({"a", "b"}, {"O", "O"})).empty());
  CHECK(extract_concepts(make_sentence({"a", "b"}, {"B-p", "B-p"})) ==
        std::vector<ConceptSpan>{{"p", 0, 0}, {"p", 1, 1}});
}

TEST_CASE("spans_from_labels tolerates orphan I tags") {
  const std::vector<std::string> labels{"I-p", "I-p", "O", "I-t", "B-t", "I-p"};
  CHECK(spans_from_labels(labels) == std::vector<ConceptSpan>{{"p", 0, 1}, {"t", 3, 3}, {"t", 4, 4}, {"p", 5, 5}});
}

TEST_CASE("count_units") {
  const auto c = parse("pain\tB-problem\nkillers\tI-problem\n\na\tB-p\nb\tI-p\nc\tO\nd\tB-t\n");
  CHECK(count_units(std::span<const Sentence>(c.sentences)) == UnitCounts{2, 6, 3});
  CHECK(count_units(std::span<const Sentence>()) == UnitCounts{0, 0, 0});
  CHECK(count_units(std::span<const Sentence>(c.sentences)) == c.totals);
  const std::vector<int> ids{1};
  CHECK(count_units(c, ids) == UnitCounts{1, 4, 2});
}

TEST_CASE("property: write/read round trip, span coverage, additivity") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto c = testing::random_corpus(seed, 12, seed % 2 == 0);
    std::ostringstream out;
    write_conll(out, c);
    std::istringstream in(out.str());
    const auto back = read_conll(in);
    CHECK(back == c);

    for (const auto& s : c.sentences) {
      std::size_t covered = 0;
      for (const auto& sp : extract_concepts(s)) covered += static_cast<std::size_t>(sp.end - sp.start + 1);
      std::size_t non_o = 0;
      for (const auto& t : s.tokens) non_o += t.gold != "O";
      CHECK(covered == non_o);
    }
    const std::span<const Sentence> all(c.sentences);
    const auto cut = c.size() / 3;
    CHECK(count_units(all.first(cut)) + count_units(all.subspan(cut)) == count_units(all));
  }
}
