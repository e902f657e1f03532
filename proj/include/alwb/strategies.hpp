#pragma once

// Query strategies: random sampling (RS), least confidence (LC), information
// diversity (IDiv), information density and diversity (IDD) and domain
// knowledge informativeness (DKI).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alwb/crf.hpp"
#include "alwb/featgen.hpp"
#include "alwb/unsup.hpp"

namespace alwb {

enum class Strategy { rs, lc, idiv, idd, dki };

/// Case-insensitive; throws ConfigError on an unknown name.
Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

struct ScoredCandidate {
  int seq_id = 0;
  double uncertainty = 0.0;
  double diversity = 1.0;
  double density = 1.0;
  double domain_knowledge = 0.0;
  double final_score = 0.0;
};

/// Unit sentence vectors (the combined SequenceVector) indexed by seq_id.
class SentenceReps {
 public:
  SentenceReps() = default;
  explicit SentenceReps(Matrix rows);  ///< rows are normalized on entry

  static SentenceReps build(const Corpus& corpus, const EmbeddingTable& emb, const LexicalTable& lex);

  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  double similarity(int a, int b) const;

 private:
  Matrix rows_;
};

/// 1 - P(y*|x).
double score_lc(const CrfModel& model, const EncodedSequence& seq);

/// Cosine of the two sentence vectors.
double sentence_similarity(int a, int b, const SentenceReps& reps);

/// 1 - max similarity to the labeled set, clamped to [0, 1]; 1 when the
/// labeled set is empty.
double diversity(int candidate, std::span<const int> labeled, const SentenceReps& reps);

/// Mean over pool members other than the candidate of max(0, similarity);
/// 1 when the candidate is alone in the pool.
double density(int candidate, std::span<const int> pool, const SentenceReps& reps);

double score_idiv(double uncertainty, int candidate, std::span<const int> labeled, const SentenceReps& reps);

double score_idd(double uncertainty, int candidate, std::span<const int> labeled, std::span<const int> pool,
                 const SentenceReps& reps, double beta = 1.0);

/// Lexicon coverage: sum of per-token longest-match lengths over
/// (length x max_len), clamped to [0, 1]; 0 for an empty lexicon.
double domain_knowledge(const Sentence& sentence, const Lexicon& lexicon);

double score_dki(double uncertainty, const Sentence& sentence, const Lexicon& lexicon, double lambda = 0.5);

/// RS: uniform sample without replacement from `seed`. Otherwise the B
/// highest final scores, ties to the lower seq_id. Returns everything when
/// the pool is no larger than B.
std::vector<int> select_batch(const std::vector<ScoredCandidate>& scores, std::size_t batch_size, Strategy strategy,
                              std::uint64_t seed);

/// Vectorized diversity and density for a whole pool at once; entry i
/// belongs to pool[i].
std::vector<double> pool_diversity(std::span<const int> pool, std::span<const int> labeled, const SentenceReps& reps);
std::vector<double> pool_density(std::span<const int> pool, const SentenceReps& reps);

}  // namespace alwb
