#include <algorithm>
#include <set>
#include <sstream>

#include "alwb/errors.hpp"
#include "alwb/featgen.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace alwb;
using testing::make_sentence;

namespace {

bool has(const std::vector<std::string>& v, const std::string& f) { return std::find(v.begin(), v.end(), f) != v.end(); }

Sentence unlabeled(const std::vector<std::string>& words) {
  return make_sentence(words, std::vector<std::string>(words.size(), "O"));
}

Lexicon af_lexicon() {
  Lexicon lex;
  lex.add("atrial fibrillation", "DISO");
  return lex;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

TEST_CASE("group A templates") {
  FeatureGroupConfig cfg;
  const auto w = emit_group_A(unlabeled({"Warfarin"}), cfg)[0];
  CHECK(has(w, "A:shape=Xxxxxxxx"));
  CHECK(has(w, "A:pre3=war"));
  CHECK(has(w, "A:suf3=rin"));
  CHECK(has(w, "A:initcap"));
  CHECK_FALSE(has(w, "A:allcaps"));

  const auto mg = emit_group_A(unlabeled({"81mg"}), cfg)[0];
  CHECK(has(mg, "A:hasdigit"));
  CHECK(has(mg, "A:shape=00xx"));
  CHECK(has(mg, "A:alnum"));

  cfg.window = 1;
  const auto ab = emit_group_A(unlabeled({"a", "b"}), cfg);
  CHECK(has(ab[1], "A:w@-1=a"));
  CHECK(has(ab[0], "A:w@1=b"));
  CHECK(has(emit_group_A(unlabeled({","}), cfg)[0], "A:punct"));
  CHECK(has(emit_group_A(unlabeled({"CT"}), cfg)[0], "A:allcaps"));
}

TEST_CASE("group B") {
  FeatureGroupConfig cfg;
  cfg.window = 0;
  auto s = unlabeled({"the", "pain"});
  s.tokens[0].pos = "DT";
  s.tokens[1].pos = "NN";
  const auto b = emit_group_B(s, cfg);
  CHECK(has(b[1], "B:pos@0=NN"));
  CHECK(has(b[1], "B:posbi=DT_NN"));
  CHECK(b[0] == std::vector<std::string>{"B:pos@0=DT"});

  s.tokens[0].pos.reset();
  for (const auto& f : emit_group_B(s, cfg)) CHECK(f.empty());
}

TEST_CASE("semantic_spans") {
  const auto lex = af_lexicon();
  const auto s = unlabeled({"has", "Atrial", "fibrillation"});
  const auto tags = semantic_spans(s, lex);
  CHECK(tags[0] == SemanticTag{std::nullopt, 0});
  CHECK(tags[1] == SemanticTag{"DISO", 2});
  CHECK(tags[2] == SemanticTag{"DISO", 2});

  auto overlap = af_lexicon();
  overlap.add("fibrillation", "FIB");
  CHECK(semantic_spans(s, overlap)[2] == SemanticTag{"DISO", 2});

  for (const auto& t : semantic_spans(s, Lexicon{})) CHECK(t == SemanticTag{std::nullopt, 0});
}

TEST_CASE("lexicon file format") {
  std::istringstream in("# comment\n\natrial fibrillation\tDISO\naspirin\tCHEM\naspirin\tOTHER\n");
  const auto lex = read_lexicon(in);
  CHECK(lex.size() == 2);
  CHECK(lex.max_len() == 2);
  CHECK(lex.find({"aspirin"}) == "CHEM");
  std::istringstream bad("no tab here\n");
  CHECK_THROWS_AS(read_lexicon(bad), DataError);
}

TEST_CASE("group C") {
  FeatureGroupConfig cfg;
  cfg.window = 1;
  const auto c = emit_group_C(unlabeled({"has", "atrial", "fibrillation"}), af_lexicon(), cfg);
  CHECK(has(c[1], "C:sem@0=DISO"));
  CHECK(has(c[0], "C:sem@0=NONE"));
  CHECK(has(c[2], "C:sem@-1=DISO"));
  CHECK(has(c[1], "C:sem@-1=NONE"));
}

TEST_CASE("assemble") {
  const auto lex = af_lexicon();
  auto s = unlabeled({"Has", "atrial", "fibrillation", "aaa", "."});
  for (auto& t : s.tokens) t.pos = "NN";
  FeatureGroupConfig a{"A"};
  FeatureGroupConfig abc{"ABC"};
  const auto only_a = assemble(s, a, &lex, nullptr);
  const auto raw_a = emit_group_A(s, a);
  const auto all = assemble(s, abc, &lex, nullptr);
  CHECK(all == assemble(s, abc, &lex, nullptr));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(only_a[i] == sorted_unique(raw_a[i]));
    CHECK(std::is_sorted(all[i].begin(), all[i].end()));
    CHECK(std::adjacent_find(all[i].begin(), all[i].end()) == all[i].end());
    CHECK(std::includes(all[i].begin(), all[i].end(), only_a[i].begin(), only_a[i].end()));
  }

  // additivity: {A,B} ∪ {C} == {A,B,C}
  const auto ab = assemble(s, FeatureGroupConfig{"AB"}, &lex, nullptr);
  const auto c = assemble(s, FeatureGroupConfig{"C"}, &lex, nullptr);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::set<std::string> u(ab[i].begin(), ab[i].end());
    u.insert(c[i].begin(), c[i].end());
    CHECK(std::vector<std::string>(u.begin(), u.end()) == all[i]);
  }

  const Lexicon none;
  CHECK(assemble(s, FeatureGroupConfig{"C"}, nullptr, nullptr) == assemble(s, FeatureGroupConfig{"C"}, &none, nullptr));
  CHECK_THROWS_AS(assemble(s, FeatureGroupConfig{"AD"}, &lex, nullptr), ConfigError);
}

TEST_CASE("property: spans never overlap and respect max_len") {
  Lexicon lex;
  lex.add("a b", "X");
  lex.add("b c d", "Y");
  lex.add("c", "Z");
  Rng rng(8);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> words(1 + uniform_index(rng, 8));
    for (auto& w : words) w = vocab[uniform_index(rng, vocab.size())];
    const auto tags = semantic_spans(unlabeled(words), lex);
    std::size_t i = 0;
    while (i < tags.size()) {
      const auto len = static_cast<std::size_t>(tags[i].length);
      CHECK(len <= lex.max_len());
      if (len == 0) {
        CHECK_FALSE(tags[i].group.has_value());
        ++i;
        continue;
      }
      REQUIRE(i + len <= tags.size());
      for (std::size_t k = i; k < i + len; ++k) CHECK(tags[k] == tags[i]);
      i += len;
    }
  }
}
