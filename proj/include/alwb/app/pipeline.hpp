#pragma once

// Shared plumbing of the subcommands: input loading, cached embeddings and
// codebooks, featurization and the cached supervised target.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alwb/alloop.hpp"
#include "alwb/app/cache.hpp"
#include "alwb/app/config.hpp"
#include "alwb/corpus.hpp"
#include "alwb/featgen.hpp"
#include "alwb/strategies.hpp"
#include "alwb/unsup.hpp"
#include "alwb/vectors.hpp"

namespace alwb::app {

/// Whitespace-tokenized text, one sentence per line, mapped to lookup keys
/// (normalized form, or lower-cased surface for punctuation).
TokenStream read_token_stream(const std::vector<std::string>& paths);

struct SupervisedResult {
  CrfModel model;
  PRF test;
  bool cache_hit = false;
};

class Workbench {
 public:
  Workbench(RunConfig config, RunLog& log);

  const RunConfig& config() const { return cfg_; }
  RunLog& log() { return log_; }
  ArtifactCache& cache() { return cache_; }

  const Corpus& train();
  const Corpus& test();
  /// Null when paths.lexicon is empty.
  const Lexicon* lexicon();

  const EmbeddingTable& embeddings();
  const LexicalTable& lexical() const { return lexical_; }
  /// Codebooks for the unsupervised letters of `letters`.
  const CodebookSet& codebooks(const std::string& letters);

  /// Feature vectors of every sentence, indexed by seq_id.
  std::vector<FeatureVector> featurize(const Corpus& corpus, const std::string& letters);

  const SentenceReps& train_reps();

  /// Full-train CRF and its test PRF for `letters`, cached.
  SupervisedResult supervised(const std::string& letters);

  /// Content hashes of every input read so far plus artifact keys.
  const std::map<std::string, std::string>& hashes() const { return hashes_; }

  /// Cache keys. Each covers the input file contents and every setting the
  /// artifact depends on.
  std::string embeddings_key();
  std::string codebook_key(Space space, int k);
  std::string supervised_key(const std::string& letters);

 private:
  Codebook build_codebook(Space space, int k);

  RunConfig cfg_;
  RunLog& log_;
  ArtifactCache cache_;
  LexicalTable lexical_;
  std::optional<Corpus> train_;
  std::optional<Corpus> test_;
  std::optional<Lexicon> lexicon_;
  bool lexicon_loaded_ = false;
  std::optional<EmbeddingTable> embeddings_;
  std::optional<TokenStream> stream_;
  CodebookSet codebooks_;
  std::optional<SentenceReps> reps_;
  std::map<std::string, std::string> hashes_;
};

}  // namespace alwb::app
