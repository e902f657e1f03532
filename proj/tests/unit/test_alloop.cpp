#include <algorithm>
#include <set>
#include <sstream>

#include "alwb/alloop.hpp"
#include "alwb/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace alwb;

namespace {

// Labels are a function of the word, so a CRF can learn them.
Corpus word_labeled_corpus(std::uint64_t seed, std::size_t sentences) {
  static const std::vector<std::pair<std::string, std::string>> vocab{
      {"aspirin", "B-treatment"}, {"warfarin", "B-treatment"}, {"pain", "B-problem"}, {"fever", "B-problem"},
      {"ct", "B-test"},           {"the", "O"},                {"was", "O"},          {"given", "O"},
      {"for", "O"},               {"and", "O"}};
  Rng rng(seed);
  std::ostringstream os;
  for (std::size_t s = 0; s < sentences; ++s) {
    const auto n = 2 + uniform_index(rng, 5);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [w, l] = vocab[uniform_index(rng, vocab.size())];
      os << w << '\t' << l << '\n';
    }
    os << '\n';
  }
  std::istringstream is(os.str());
  return read_conll(is);
}

struct Setup {
  Corpus train;
  Corpus test;
  ALData data;

  Setup(std::size_t n_train, std::size_t n_test) : train(word_labeled_corpus(1, n_train)), test(word_labeled_corpus(2, n_test)) {
    data.train = &train;
    data.test = &test;
    for (const auto& s : train.sentences) data.train_features.push_back(assemble(s, FeatureGroupConfig{"A"}, nullptr, nullptr));
    for (const auto& s : test.sentences) data.test_features.push_back(assemble(s, FeatureGroupConfig{"A"}, nullptr, nullptr));
  }
};

ALConfig config(Strategy s, double fraction) {
  ALConfig c;
  c.strategy = s;
  c.init_fraction = fraction;
  c.seed = 5;
  c.crf.max_iterations = 60;
  return c;
}

void check_partition(const ALState& st, std::size_t n) {
  std::set<int> labeled(st.labeled_ids.begin(), st.labeled_ids.end());
  CHECK(labeled.size() == st.labeled_ids.size());
  CHECK(std::is_sorted(st.pool_ids.begin(), st.pool_ids.end()));
  for (int p : st.pool_ids) CHECK(labeled.count(p) == 0);
  CHECK(labeled.size() + st.pool_ids.size() == n);
}

}  // namespace

TEST_CASE("annotation_rate") {
  CHECK(annotation_rate(24, 100) == 24.0);
  CHECK(annotation_rate(100, 100) == 100.0);
  CHECK(annotation_rate(30673, 30673) == 100.0);
  CHECK_THROWS_AS(annotation_rate(0, 0), DataError);
}

TEST_CASE("init_split") {
  const auto big = testing::random_corpus(3, 1000, false);
  const auto st = init_split(big, 0.005, 9);
  CHECK(st.labeled_ids.size() == 5);
  CHECK(st.pool_ids.size() == 995);
  check_partition(st, 1000);
  CHECK(init_split(big, 0.005, 9).labeled_ids == st.labeled_ids);
  CHECK(init_split(big, 0.005, 10).labeled_ids != st.labeled_ids);

  const auto small = testing::random_corpus(3, 10, false);
  CHECK(init_split(small, 0.005, 1).labeled_ids.size() == 1);
  CHECK_THROWS_AS(init_split(Corpus{}, 0.005, 1), DataError);
}

TEST_CASE("iterations keep the partition and add the batch's units") {
  Setup su(40, 15);
  for (auto strategy : {Strategy::rs, Strategy::lc}) {
    const ActiveLearner al(su.data, config(strategy, 0.1));
    CHECK(al.batch_size() == 4);
    auto st = al.start();
    check_partition(st, 40);
    for (int it = 1; it <= 3; ++it) {
      const auto before = st.labeled_ids;
      const auto prev_units = st.history.back().used;
      st = al.run_iteration(std::move(st));
      check_partition(st, 40);
      CHECK(st.iteration == it);
      CHECK(st.history.size() == static_cast<std::size_t>(it) + 1);
      const std::vector<int> batch(st.labeled_ids.begin() + static_cast<std::ptrdiff_t>(before.size()),
                                   st.labeled_ids.end());
      CHECK(batch.size() == 4);
      CHECK(st.history.back().used == prev_units + count_units(su.train, batch));
      CHECK(st.history.back().used.sequences == 4 + 4 * static_cast<std::size_t>(it));
    }
  }
}

TEST_CASE("pool of exactly one batch empties") {
  Setup su(10, 5);
  auto cfg = config(Strategy::lc, 0.5);
  const ActiveLearner al(su.data, cfg);
  auto st = al.start();
  REQUIRE(st.pool_ids.size() == al.batch_size());
  st = al.run_iteration(std::move(st));
  CHECK(st.pool_ids.empty());
  CHECK_THROWS_AS(al.run_iteration(st), DataError);
}

TEST_CASE("RS run replays to identical history") {
  Setup su(30, 10);
  const ActiveLearner al(su.data, config(Strategy::rs, 0.1));
  const auto [s1, r1] = al.run_until(2.0);
  const auto [s2, r2] = al.run_until(2.0);
  CHECK(history_csv(s1.history, su.train.totals) == history_csv(s2.history, su.train.totals));
  CHECK(s1.labeled_ids == s2.labeled_ids);
}

TEST_CASE("run_until stopping") {
  Setup su(30, 10);
  const ActiveLearner al(su.data, config(Strategy::lc, 0.1));
  const auto [s0, r0] = al.run_until(0.0);
  CHECK(r0.reached);
  CHECK(r0.iteration == 0);
  const auto init_units = count_units(su.train, s0.labeled_ids);
  CHECK(r0.sar == annotation_rate(init_units.sequences, su.train.totals.sequences));
  CHECK(r0.tar == annotation_rate(init_units.tokens, su.train.totals.tokens));
  CHECK(r0.car == annotation_rate(init_units.concepts, su.train.totals.concepts));

  const auto [sx, rx] = al.run_until(1.01);
  CHECK_FALSE(rx.reached);
  CHECK(rx.sar == 100.0);
  CHECK(rx.tar == 100.0);
  CHECK(rx.car == 100.0);
  CHECK(sx.pool_ids.empty());
  for (std::size_t i = 1; i < sx.history.size(); ++i) {
    CHECK(sx.history[i].used.tokens >= sx.history[i - 1].used.tokens);
  }
}

TEST_CASE("fully labeled pool reproduces the supervised model") {
  Setup su(24, 10);
  auto cfg = config(Strategy::lc, 0.25);
  const ActiveLearner al(su.data, cfg);
  const auto supervised = train_supervised(su.data.train_features, su.train, cfg.crf);
  const double target = evaluate_model(supervised, su.data.test_features, su.test).f1;
  const auto [st, rates] = al.run_until(target);
  CHECK(rates.reached);
  std::vector<int> all(24);
  for (int i = 0; i < 24; ++i) all[static_cast<std::size_t>(i)] = i;
  std::vector<int> shuffled = all;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(al.train_on(shuffled) == supervised);
}

TEST_CASE("strategy prerequisites") {
  Setup su(10, 5);
  CHECK_THROWS_AS(ActiveLearner(su.data, config(Strategy::dki, 0.1)), ConfigError);
  CHECK_THROWS_AS(ActiveLearner(su.data, config(Strategy::idd, 0.1)), ConfigError);
  Lexicon lex;
  lex.add("aspirin", "CHEM");
  su.data.lexicon = &lex;
  const ActiveLearner al(su.data, config(Strategy::dki, 0.2));
  const auto st = al.start();
  for (const auto& c : al.score_pool(st)) {
    CHECK(c.final_score == doctest::Approx(0.5 * c.uncertainty + 0.5 * c.domain_knowledge));
  }
}

TEST_CASE("history csv") {
  std::vector<HistoryRow> h{{0, {1, 4, 2}, PRF::from_counts(1, 1, 1)}};
  const auto csv = history_csv(h, UnitCounts{4, 16, 8});
  CHECK(csv ==
        "iteration,seq_used,tok_used,concept_used,sar,tar,car,precision,recall,f1\n"
        "0,1,4,2,25.0000,25.0000,25.0000,0.500000,0.500000,0.500000\n");
}
