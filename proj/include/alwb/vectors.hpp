#pragma once

// Dense token vectors: skip-gram (negative sampling) word embeddings and
// training-free "lexical" vectors accumulated from character n-grams.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace alwb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// v / ||v||, or the zero vector when v is zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> normalized_or_zero(
    const Eigen::MatrixBase<Derived>& v) {
  using Result = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  const auto n = v.norm();
  if (n == typename Derived::Scalar(0)) return Result::Zero(v.size());
  return v / n;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const auto na = a.norm();
  const auto nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return a.dot(b) / (na * nb);
}

using TokenStream = std::vector<std::vector<std::string>>;

struct SkipGramConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  int min_count = 2;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
  bool subsample = false;
  double sample = 1e-3;
  /// 1 is the deterministic reference mode; >1 applies lock-free updates
  /// from concurrent workers and is not reproducible run to run.
  int threads = 1;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, Matrix vectors, SkipGramConfig meta = {});

  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  /// Row i is the vector of words()[i].
  const Matrix& vectors() const { return vectors_; }
  const SkipGramConfig& meta() const { return meta_; }

  /// Row index of `word`, or -1 when out of vocabulary.
  int index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word) >= 0; }
  Vector vector(std::string_view word) const;  ///< zero when OOV

  /// Mean skip-gram loss per training pair, one entry per epoch.
  std::vector<double> epoch_loss;

  bool operator==(const EmbeddingTable& o) const {
    return words_ == o.words_ && vectors_ == o.vectors_;
  }

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, int> index_;
  SkipGramConfig meta_;
};

/// Train skip-gram with negative sampling. Throws DataError on an empty
/// effective vocabulary and ConfigError on dim < 2.
EmbeddingTable train_skipgram(const TokenStream& stream, const SkipGramConfig& config);

/// Text format: "<vocab_size> <dim>" then "token v1 ... vdim" per line.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_embeddings(std::istream& in);

struct NgramConfig {
  bool unigrams = true;
  bool bigrams = true;
  bool trigrams = true;
  bool tetragrams = true;
  bool skipgrams = true;

  bool operator==(const NgramConfig&) const = default;
};

/// Character n-grams of a token (multiset). Uni-grams are taken over the
/// bare token; longer n-grams and skip-grams (x_z) over "^token$". Skip-grams
/// whose two ends are both boundary markers are not emitted.
std::vector<std::string> char_ngrams(std::string_view token, const NgramConfig& config = {});

struct LexicalConfig {
  int dim = 40;
  std::uint64_t seed = 7;
  NgramConfig ngrams;

  bool operator==(const LexicalConfig&) const = default;
};

/// Maps every n-gram to a fixed pseudo-random unit vector determined by
/// (n-gram, seed, dim). Immutable; vectors are regenerated on demand.
class LexicalTable {
 public:
  explicit LexicalTable(LexicalConfig config = {});

  int dim() const { return config_.dim; }
  const LexicalConfig& config() const { return config_; }

  Vector ngram_vector(std::string_view ngram) const;
  /// Unit-norm sum of the token's n-gram vectors. Total for non-empty tokens.
  Vector lexical_vector(std::string_view token) const;

 private:
  LexicalConfig config_;
};

/// Persisted form: "lexical <seed> <dim> <ngram flags>".
void write_lexical_meta(std::ostream& out, const LexicalTable& table);
LexicalTable read_lexical_meta(std::istream& in);

}  // namespace alwb
