#include "alwb/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"
#include "alwb/text.hpp"

namespace alwb {

Strategy parse_strategy(std::string_view name) {
  const auto n = text::to_lower(text::trim(name));
  if (n == "rs") return Strategy::rs;
  if (n == "lc") return Strategy::lc;
  if (n == "idiv") return Strategy::idiv;
  if (n == "idd") return Strategy::idd;
  if (n == "dki") return Strategy::dki;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected rs, lc, idiv, idd or dki)");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::rs: return "rs";
    case Strategy::lc: return "lc";
    case Strategy::idiv: return "idiv";
    case Strategy::idd: return "idd";
    case Strategy::dki: return "dki";
  }
  return "rs";
}

SentenceReps::SentenceReps(Matrix rows) : rows_(std::move(rows)) {
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    rows_.row(i) = normalized_or_zero(rows_.row(i).transpose()).transpose();
  }
}

SentenceReps SentenceReps::build(const Corpus& corpus, const EmbeddingTable& emb, const LexicalTable& lex) {
  Matrix rows(static_cast<Eigen::Index>(corpus.size()), lex.dim() + emb.dim());
  for (const auto& s : corpus.sentences) {
    rows.row(s.seq_id) = compose_span_vector(token_keys(s), emb, lex).combined.transpose();
  }
  return SentenceReps(std::move(rows));
}

double SentenceReps::similarity(int a, int b) const { return rows_.row(a).dot(rows_.row(b)); }

double score_lc(const CrfModel& model, const EncodedSequence& seq) {
  return 1.0 - sequence_confidence(model, seq);
}

double sentence_similarity(int a, int b, const SentenceReps& reps) { return reps.similarity(a, b); }

double diversity(int candidate, std::span<const int> labeled, const SentenceReps& reps) {
  if (labeled.empty()) return 1.0;
  double best = -1.0;
  for (int l : labeled) best = std::max(best, reps.similarity(candidate, l));
  return std::clamp(1.0 - best, 0.0, 1.0);
}

double density(int candidate, std::span<const int> pool, const SentenceReps& reps) {
  double sum = 0.0;
  std::size_t others = 0;
  for (int u : pool) {
    if (u == candidate) continue;
    sum += std::max(0.0, reps.similarity(candidate, u));
    ++others;
  }
  return others == 0 ? 1.0 : std::clamp(sum / static_cast<double>(others), 0.0, 1.0);
}

double score_idiv(double uncertainty, int candidate, std::span<const int> labeled, const SentenceReps& reps) {
  return uncertainty * diversity(candidate, labeled, reps);
}

double score_idd(double uncertainty, int candidate, std::span<const int> labeled, std::span<const int> pool,
                 const SentenceReps& reps, double beta) {
  return uncertainty * std::pow(density(candidate, pool, reps), beta) * diversity(candidate, labeled, reps);
}

double domain_knowledge(const Sentence& sentence, const Lexicon& lexicon) {
  if (lexicon.max_len() == 0 || sentence.size() == 0) return 0.0;
  double covered = 0.0;
  for (const auto& tag : semantic_spans(sentence, lexicon)) covered += tag.length;
  return std::clamp(covered / (static_cast<double>(sentence.size()) * static_cast<double>(lexicon.max_len())), 0.0,
                    1.0);
}

double score_dki(double uncertainty, const Sentence& sentence, const Lexicon& lexicon, double lambda) {
  return (1.0 - lambda) * uncertainty + lambda * domain_knowledge(sentence, lexicon);
}

std::vector<int> select_batch(const std::vector<ScoredCandidate>& scores, std::size_t batch_size, Strategy strategy,
                              std::uint64_t seed) {
  std::vector<int> ids;
  ids.reserve(scores.size());
  if (scores.size() <= batch_size) {
    for (const auto& c : scores) ids.push_back(c.seq_id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }
  if (strategy == Strategy::rs) {
    for (const auto& c : scores) ids.push_back(c.seq_id);
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    shuffle(ids, rng);
    ids.resize(batch_size);
    return ids;
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(batch_size), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a].final_score != scores[b].final_score) {
                        return scores[a].final_score > scores[b].final_score;
                      }
                      return scores[a].seq_id < scores[b].seq_id;
                    });
  for (std::size_t i = 0; i < batch_size; ++i) ids.push_back(scores[order[i]].seq_id);
  return ids;
}

namespace {

Matrix gather(std::span<const int> ids, const SentenceReps& reps) {
  Matrix m(static_cast<Eigen::Index>(ids.size()), reps.rows().cols());
  for (std::size_t i = 0; i < ids.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = reps.rows().row(ids[i]);
  return m;
}

constexpr Eigen::Index kBlock = 512;

}  // namespace

std::vector<double> pool_diversity(std::span<const int> pool, std::span<const int> labeled, const SentenceReps& reps) {
  std::vector<double> out(pool.size(), 1.0);
  if (labeled.empty() || pool.empty()) return out;
  const Matrix P = gather(pool, reps);
  const Matrix Lm = gather(labeled, reps);
  for (Eigen::Index start = 0; start < P.rows(); start += kBlock) {
    const auto rows = std::min(kBlock, P.rows() - start);
    const Matrix sims = P.middleRows(start, rows) * Lm.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      out[static_cast<std::size_t>(start + i)] = std::clamp(1.0 - sims.row(i).maxCoeff(), 0.0, 1.0);
    }
  }
  return out;
}

std::vector<double> pool_density(std::span<const int> pool, const SentenceReps& reps) {
  std::vector<double> out(pool.size(), 1.0);
  if (pool.size() < 2) return out;
  const Matrix P = gather(pool, reps);
  for (Eigen::Index start = 0; start < P.rows(); start += kBlock) {
    const auto rows = std::min(kBlock, P.rows() - start);
    Matrix sims = P.middleRows(start, rows) * P.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      sims(i, start + i) = 0.0;  // exclude the candidate itself
      const double sum = sims.row(i).cwiseMax(0.0).sum();
      out[static_cast<std::size_t>(start + i)] = std::clamp(sum / static_cast<double>(pool.size() - 1), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace alwb
