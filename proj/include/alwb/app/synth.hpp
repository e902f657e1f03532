#pragma once

// Synthetic BIO corpora with planted distributional classes. Surface forms
// are random syllable strings, so only co-occurrence reveals a word's class.

#include <filesystem>
#include <string>
#include <vector>

#include "alwb/app/config.hpp"
#include "alwb/corpus.hpp"
#include "alwb/vectors.hpp"

namespace alwb::app {

struct SynthCorpus {
  Corpus train;
  Corpus test;
  TokenStream embed;  ///< unlabeled sentences, surface tokens
  std::vector<std::pair<std::string, std::string>> lexicon;  ///< (term, group)
};

SynthCorpus generate_synthetic(const SynthConfig& config);

/// Writes train.conll, test.conll, embed.txt and lexicon.tsv into `dir`.
void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace alwb::app
