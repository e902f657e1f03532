#pragma once

// Bi-gram and sentence vectors, k-means codebooks, and the cluster-id
// feature groups D, G, H (word level) and J, K, L, M (sequence level).

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alwb/corpus.hpp"
#include "alwb/errors.hpp"
#include "alwb/vectors.hpp"

namespace alwb {

/// Boundary token for bi-grams at sentence edges: zero word vector,
/// lexical vector of the literal string.
inline constexpr std::string_view kPadToken = "<pad>";

/// Key used for vector lookups: the normalized form, or the lower-cased
/// surface for tokens that normalize to nothing (punctuation).
std::string token_key(const Token& token);
std::vector<std::string> token_keys(const Sentence& sentence);

struct SequenceVector {
  Vector lex_part;
  Vector word_part;
  Vector combined;
};

/// Accumulate and normalize lexical and word vectors of `tokens`, then
/// concatenate and normalize. OOV tokens (and kPadToken) add no word vector.
SequenceVector compose_span_vector(std::span<const std::string> tokens, const EmbeddingTable& emb,
                                   const LexicalTable& lex);

enum class Space { word, lexical, bigram, sentence };

std::string_view to_string(Space space);
Space parse_space(std::string_view name);

struct Codebook {
  Matrix centroids;  ///< k x dim, one centroid per row
  Space space = Space::word;
  std::uint64_t seed = 0;

  int k() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

/// Nearest centroid by Euclidean distance; ties go to the lowest index.
template <typename Derived>
int assign_cluster(const Eigen::MatrixBase<Derived>& v, const Codebook& cb) {
  if (v.size() != cb.dim()) {
    throw std::invalid_argument("assign_cluster: dimension " + std::to_string(v.size()) + " vs codebook " +
                                std::to_string(cb.dim()));
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cb.k(); ++j) {
    const double d = (cb.centroids.row(j).transpose() - v).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

struct KMeansOptions {
  int k = 8;
  std::uint64_t seed = 1;
  int max_iters = 50;
  Space space = Space::word;
};

struct KMeansResult {
  Codebook codebook;
  std::vector<int> assignment;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> objective;
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or max_iters. Points are rows. Throws DataError when there are
/// fewer than k distinct points.
KMeansResult kmeans(const Eigen::Ref<const Matrix>& points, const KMeansOptions& options);

/// Number of distinct rows.
std::size_t count_distinct_rows(const Eigen::Ref<const Matrix>& points);

/// Header "k dim space seed", then k centroid lines.
void write_codebook(std::ostream& out, const Codebook& cb);
Codebook read_codebook(std::istream& in);

/// Points clustered for each space, as rows. Word vectors are unit-normalized.
/// Bi-gram and sentence spaces use distinct spans of `stream`, subsampled to
/// at most max_points with `seed`.
Matrix word_space_points(const EmbeddingTable& emb);
Matrix lexical_space_points(const EmbeddingTable& emb, const LexicalTable& lex);
Matrix bigram_space_points(const TokenStream& stream, const EmbeddingTable& emb, const LexicalTable& lex,
                           std::size_t max_points, std::uint64_t seed);
Matrix sentence_space_points(const TokenStream& stream, const EmbeddingTable& emb, const LexicalTable& lex,
                             std::size_t max_points, std::uint64_t seed);

enum class Scope { window, left_bigram, right_bigram, sentence };

struct UnsupGroup {
  Space space;
  int k;
  Scope scope;
};

struct UnsupFeatureConfig {
  std::map<char, UnsupGroup> groups;

  /// D,G: word clusters k=500/100; H: lexical k=500; J/K: left/right
  /// bi-gram k=500; L/M: sentence k=100/500.
  static UnsupFeatureConfig defaults();
  static bool is_unsup_letter(char letter);
};

using CodebookKey = std::pair<Space, int>;  ///< (space, configured k)
using CodebookSet = std::map<CodebookKey, Codebook>;

struct UnsupResources {
  const EmbeddingTable* embeddings = nullptr;
  const LexicalTable* lexical = nullptr;
  const CodebookSet* codebooks = nullptr;
};

using TokenFeatures = std::vector<std::vector<std::string>>;

/// Cluster-id features of the enabled letters for each token of `sentence`.
TokenFeatures emit_unsup_features(const Sentence& sentence, const UnsupResources& res,
                                  const UnsupFeatureConfig& cfg, std::string_view letters, int window);

}  // namespace alwb
