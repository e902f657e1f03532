#pragma once

// Run configuration: flat "section.key = value" text. Every key has a
// documented default; unknown keys are rejected.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alwb/alloop.hpp"
#include "alwb/featgen.hpp"
#include "alwb/unsup.hpp"
#include "alwb/vectors.hpp"

namespace alwb::app {

struct SynthConfig {
  std::uint64_t seed = 1;
  int sentences = 2000;          ///< labeled sentences, split into train/test
  double test_fraction = 0.25;
  int embed_sentences = 30000;   ///< unlabeled sentences for the embedding corpus
  int vocab_per_class = 500;
  double zipf = 0.8;
  double boilerplate = 0.35;     ///< fraction of concept-free template sentences
  double lexicon_coverage = 0.3; ///< fraction of concept words listed in the lexicon
};

struct RunConfig {
  // paths
  std::string train;
  std::string test;
  std::vector<std::string> embed_corpus;
  std::string lexicon;
  std::string cache_dir = ".alwb-cache";
  std::string out_dir = "out";

  FeatureGroupConfig features;
  SkipGramConfig embed;
  LexicalConfig lexical;

  // codebook sizes per (space, granularity)
  int k_word_fine = 500;       ///< D
  int k_word_coarse = 100;     ///< G
  int k_lexical = 500;         ///< H
  int k_bigram = 500;          ///< J, K
  int k_sentence_coarse = 100; ///< L
  int k_sentence_fine = 500;   ///< M
  std::uint64_t unsup_seed = 1;
  int kmeans_iters = 50;
  int max_span_points = 20000;

  CrfTrainConfig crf;
  ALConfig al;
  std::optional<double> target_f1;

  std::uint64_t ttest_seed = 1;
  std::string ttest_letters_b = "A";

  SynthConfig synth;

  /// Set one key from its textual value. Throws ConfigError on an unknown key
  /// or an unparsable value.
  void set(const std::string& key, const std::string& value);

  /// Every key with its current value, in documentation order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  UnsupFeatureConfig unsup_groups() const;

  /// Letters that use unsupervised codebooks.
  std::string unsup_letters() const;
};

struct KeyDoc {
  std::string key;
  std::string default_value;
  std::string description;
};

/// All keys with defaults and one-line descriptions.
std::vector<KeyDoc> documented_keys();

/// Parse "key = value" lines; '#' starts a comment. Throws ConfigError.
void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin = "<config>");
void apply_config_file(RunConfig& cfg, const std::string& path);

/// "key=value" override as given on the command line.
void apply_override(RunConfig& cfg, const std::string& assignment);

void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace alwb::app
