#pragma once

// Pool-based active learning with a simulated oracle: initial split, then
// score -> select -> label -> retrain -> evaluate until the target F1.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "alwb/corpus.hpp"
#include "alwb/crf.hpp"
#include "alwb/eval.hpp"
#include "alwb/featgen.hpp"
#include "alwb/strategies.hpp"

namespace alwb {

struct ALConfig {
  Strategy strategy = Strategy::lc;
  double init_fraction = 0.005;
  /// 0 means "same as the initial labeled set size".
  std::size_t batch_size = 0;
  std::uint64_t seed = 1;
  double beta = 1.0;    ///< IDD density exponent
  double lambda = 0.5;  ///< DKI mixing weight
  CrfTrainConfig crf;
};

struct HistoryRow {
  int iteration = 0;
  UnitCounts used;
  PRF test;
};

struct ALState {
  std::vector<int> labeled_ids;  ///< in labeling order
  std::vector<int> pool_ids;     ///< sorted
  int iteration = 0;
  std::vector<HistoryRow> history;
  std::uint64_t seed = 0;
  CrfModel model;  ///< trained on labeled_ids
};

struct AnnotationRates {
  double sar = 100.0;
  double tar = 100.0;
  double car = 100.0;
  bool reached = false;
  double target_f1 = 0.0;
  int iteration = -1;  ///< first iteration meeting the target, -1 if none
};

/// 100 * used / total. Throws DataError when total is 0.
double annotation_rate(std::size_t used, std::size_t total);

/// Uniformly random labeled set of max(1, round(fraction * N)) sequences.
ALState init_split(const Corpus& train, double init_fraction, std::uint64_t seed);

/// Everything an iteration needs, precomputed once per run.
struct ALData {
  const Corpus* train = nullptr;
  const Corpus* test = nullptr;
  std::vector<FeatureVector> train_features;  ///< by seq_id
  std::vector<FeatureVector> test_features;
  const Lexicon* lexicon = nullptr;     ///< required by dki
  const SentenceReps* reps = nullptr;   ///< required by idiv and idd
};

class ActiveLearner {
 public:
  ActiveLearner(const ALData& data, ALConfig config);

  /// Initial split, first model and the iteration-0 history row.
  ALState start() const;

  /// One round: score the pool, move a batch to the labeled set, retrain
  /// from scratch, evaluate on the test corpus.
  ALState run_iteration(ALState state) const;

  /// Iterate until test F1 >= target_f1 or the pool is exhausted.
  std::pair<ALState, AnnotationRates> run_until(double target_f1) const;

  std::size_t batch_size() const { return batch_size_; }

  CrfModel train_on(const std::vector<int>& ids) const;
  PRF evaluate(const CrfModel& model) const;
  std::vector<ScoredCandidate> score_pool(const ALState& state) const;

 private:
  const ALData& data_;
  ALConfig config_;
  std::size_t batch_size_ = 1;
  std::vector<double> domain_knowledge_;
};

AnnotationRates rates_at(const HistoryRow& row, const UnitCounts& totals, double target_f1);

/// Columns: iteration, seq_used, tok_used, concept_used, sar, tar, car,
/// precision, recall, f1.
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history, const UnitCounts& totals);
std::string history_csv(const std::vector<HistoryRow>& history, const UnitCounts& totals);

/// Full-train supervised model on every train sequence (seq_id order).
CrfModel train_supervised(const std::vector<FeatureVector>& features, const Corpus& train,
                          const CrfTrainConfig& config);

/// Decode every sentence and score against gold spans.
PRF evaluate_model(const CrfModel& model, const std::vector<FeatureVector>& features, const Corpus& corpus);

}  // namespace alwb
