#include "alwb/alloop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"
#include "alwb/text.hpp"

namespace alwb {

double annotation_rate(std::size_t used, std::size_t total) {
  if (total == 0) throw DataError("annotation rate: total unit count is 0");
  return 100.0 * static_cast<double>(used) / static_cast<double>(total);
}

ALState init_split(const Corpus& train, double init_fraction, std::uint64_t seed) {
  if (train.size() == 0) throw DataError("init_split: empty train set");
  if (!(init_fraction > 0.0 && init_fraction < 1.0)) throw ConfigError("init_split: fraction must be in (0, 1)");
  const auto n = train.size();
  const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(init_fraction * static_cast<double>(n))));
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(derive_seed(seed, 0x696e6974ULL));
  shuffle(ids, rng);
  ALState st;
  st.seed = seed;
  st.labeled_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(want, n)));
  std::sort(st.labeled_ids.begin(), st.labeled_ids.end());
  st.pool_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(std::min(want, n)), ids.end());
  std::sort(st.pool_ids.begin(), st.pool_ids.end());
  return st;
}

CrfModel train_supervised(const std::vector<FeatureVector>& features, const Corpus& train,
                          const CrfTrainConfig& config) {
  std::vector<LabeledSequence> data;
  data.reserve(train.size());
  for (const auto& s : train.sentences) {
    data.push_back({features.at(static_cast<std::size_t>(s.seq_id)), s.gold_labels(), s.seq_id});
  }
  return train_crf(data, config);
}

PRF evaluate_model(const CrfModel& model, const std::vector<FeatureVector>& features, const Corpus& corpus) {
  SpanSets gold;
  SpanSets pred;
  gold.reserve(corpus.size());
  pred.reserve(corpus.size());
  for (const auto& s : corpus.sentences) {
    gold.push_back(extract_concepts(s));
    const auto labels = predict(model, features.at(static_cast<std::size_t>(s.seq_id)));
    pred.push_back(spans_from_labels(labels));
  }
  return phrase_prf(gold, pred);
}

ActiveLearner::ActiveLearner(const ALData& data, ALConfig config) : data_(data), config_(std::move(config)) {
  if (data_.train == nullptr || data_.test == nullptr) throw ConfigError("active learner: missing corpora");
  if (data_.train_features.size() != data_.train->size() || data_.test_features.size() != data_.test->size()) {
    throw ConfigError("active learner: features not aligned with corpora");
  }
  const auto n = data_.train->size();
  batch_size_ = config_.batch_size > 0
                    ? config_.batch_size
                    : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::llround(config_.init_fraction * static_cast<double>(n))));
  const auto s = config_.strategy;
  if ((s == Strategy::idiv || s == Strategy::idd) && data_.reps == nullptr) {
    throw ConfigError("strategy " + std::string(to_string(s)) + " needs sentence vectors (embeddings)");
  }
  if (s == Strategy::dki) {
    if (data_.lexicon == nullptr) throw ConfigError("strategy dki needs a lexicon");
    domain_knowledge_.reserve(n);
    for (const auto& sent : data_.train->sentences) {
      domain_knowledge_.push_back(domain_knowledge(sent, *data_.lexicon));
    }
  }
}

CrfModel ActiveLearner::train_on(const std::vector<int>& ids) const {
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  std::vector<LabeledSequence> data;
  data.reserve(sorted.size());
  for (int id : sorted) {
    const auto& s = data_.train->sentences[static_cast<std::size_t>(id)];
    data.push_back({data_.train_features[static_cast<std::size_t>(id)], s.gold_labels(), id});
  }
  return train_crf(data, config_.crf);
}

PRF ActiveLearner::evaluate(const CrfModel& model) const {
  return evaluate_model(model, data_.test_features, *data_.test);
}

ALState ActiveLearner::start() const {
  ALState st = init_split(*data_.train, config_.init_fraction, config_.seed);
  st.model = train_on(st.labeled_ids);
  st.history.push_back({0, count_units(*data_.train, st.labeled_ids), evaluate(st.model)});
  return st;
}

std::vector<ScoredCandidate> ActiveLearner::score_pool(const ALState& state) const {
  const auto& pool = state.pool_ids;
  std::vector<ScoredCandidate> out(pool.size());
  const auto s = config_.strategy;
  for (std::size_t i = 0; i < pool.size(); ++i) out[i].seq_id = pool[i];
  if (s == Strategy::rs) return out;

  for (auto& c : out) {
    const auto enc = state.model.encode(data_.train_features[static_cast<std::size_t>(c.seq_id)]);
    c.uncertainty = score_lc(state.model, enc);
    c.final_score = c.uncertainty;
  }
  if (s == Strategy::idiv || s == Strategy::idd) {
    const auto div = pool_diversity(pool, state.labeled_ids, *data_.reps);
    std::vector<double> dens(pool.size(), 1.0);
    if (s == Strategy::idd) dens = pool_density(pool, *data_.reps);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      out[i].diversity = div[i];
      out[i].density = dens[i];
      out[i].final_score = out[i].uncertainty * div[i] * (s == Strategy::idd ? std::pow(dens[i], config_.beta) : 1.0);
    }
  } else if (s == Strategy::dki) {
    for (auto& c : out) {
      c.domain_knowledge = domain_knowledge_[static_cast<std::size_t>(c.seq_id)];
      c.final_score = (1.0 - config_.lambda) * c.uncertainty + config_.lambda * c.domain_knowledge;
    }
  }
  return out;
}

ALState ActiveLearner::run_iteration(ALState state) const {
  if (state.pool_ids.empty()) throw DataError("run_iteration: pool is empty");
  const auto scores = score_pool(state);
  const auto batch = select_batch(scores, batch_size_, config_.strategy,
                                  derive_seed(state.seed, 0x7273ULL + static_cast<std::uint64_t>(state.iteration)));
  std::vector<int> chosen = batch;
  std::sort(chosen.begin(), chosen.end());
  std::vector<int> rest;
  rest.reserve(state.pool_ids.size() - chosen.size());
  std::set_difference(state.pool_ids.begin(), state.pool_ids.end(), chosen.begin(), chosen.end(),
                      std::back_inserter(rest));
  state.pool_ids = std::move(rest);
  state.labeled_ids.insert(state.labeled_ids.end(), batch.begin(), batch.end());
  ++state.iteration;
  state.model = train_on(state.labeled_ids);
  state.history.push_back({state.iteration, count_units(*data_.train, state.labeled_ids), evaluate(state.model)});
  return state;
}

AnnotationRates rates_at(const HistoryRow& row, const UnitCounts& totals, double target_f1) {
  AnnotationRates r;
  r.target_f1 = target_f1;
  r.reached = true;
  r.iteration = row.iteration;
  r.sar = annotation_rate(row.used.sequences, totals.sequences);
  r.tar = annotation_rate(row.used.tokens, totals.tokens);
  r.car = totals.concepts > 0 ? annotation_rate(row.used.concepts, totals.concepts) : 100.0;
  return r;
}

std::pair<ALState, AnnotationRates> ActiveLearner::run_until(double target_f1) const {
  const auto& totals = data_.train->totals;
  ALState st = start();
  while (true) {
    if (st.history.back().test.f1 >= target_f1) {
      auto rates = rates_at(st.history.back(), totals, target_f1);
      return {std::move(st), rates};
    }
    if (st.pool_ids.empty()) break;
    st = run_iteration(std::move(st));
  }
  AnnotationRates r;
  r.target_f1 = target_f1;
  return {std::move(st), r};
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history, const UnitCounts& totals) {
  out << "iteration,seq_used,tok_used,concept_used,sar,tar,car,precision,recall,f1\n";
  for (const auto& h : history) {
    const double car = totals.concepts > 0 ? annotation_rate(h.used.concepts, totals.concepts) : 100.0;
    out << h.iteration << ',' << h.used.sequences << ',' << h.used.tokens << ',' << h.used.concepts << ','
        << text::format_fixed(annotation_rate(h.used.sequences, totals.sequences), 4) << ','
        << text::format_fixed(annotation_rate(h.used.tokens, totals.tokens), 4) << ','
        << text::format_fixed(car, 4) << ',' << text::format_fixed(h.test.precision, 6) << ','
        << text::format_fixed(h.test.recall, 6) << ',' << text::format_fixed(h.test.f1, 6) << '\n';
  }
}

std::string history_csv(const std::vector<HistoryRow>& history, const UnitCounts& totals) {
  std::ostringstream os;
  write_history_csv(os, history, totals);
  return os.str();
}

}  // namespace alwb
