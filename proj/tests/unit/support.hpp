#pragma once

// Small generators shared by the unit tests.

#include <sstream>
#include <string>
#include <vector>

#include "alwb/corpus.hpp"
#include "alwb/rng.hpp"

namespace alwb::testing {

inline Sentence make_sentence(const std::vector<std::string>& words, const std::vector<std::string>& labels,
                              int seq_id = 0) {
  Sentence s;
  s.seq_id = seq_id;
  for (std::size_t i = 0; i < words.size(); ++i) {
    s.tokens.push_back({words[i], preprocess(words[i]), std::nullopt, labels[i]});
  }
  return s;
}

/// Random well-formed BIO labels over the given concept types.
inline std::vector<std::string> random_bio(Rng& rng, std::size_t n, const std::vector<std::string>& types) {
  std::vector<std::string> out;
  std::string prev = "O";
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = uniform_index(rng, 3);
    if (r == 0) {
      out.push_back("O");
    } else if (r == 1 || prev == "O") {
      out.push_back("B-" + types[uniform_index(rng, types.size())]);
    } else {
      out.push_back("I-" + std::string(label_type(prev)));
    }
    prev = out.back();
  }
  return out;
}

inline std::string random_word(Rng& rng) {
  static const std::vector<std::string> pool{"Blood", "pressure", "81mg", "aspirin", ",", "the", "CT", "scan",
                                             "x-ray", "pain", "killers", "3.5", "(", "Warfarin", "kidney"};
  return pool[uniform_index(rng, pool.size())];
}

inline Corpus random_corpus(std::uint64_t seed, std::size_t sentences, bool with_pos) {
  Rng rng(seed);
  std::ostringstream os;
  for (std::size_t s = 0; s < sentences; ++s) {
    if (s % 3 == 0) os << "# doc d" << s / 3 << '\n';
    const auto n = 1 + uniform_index(rng, 6);
    const auto labels = random_bio(rng, n, {"problem", "test", "treatment"});
    for (std::size_t i = 0; i < n; ++i) {
      os << random_word(rng) << '\t';
      if (with_pos) os << (i % 2 ? "NN" : "DT") << '\t';
      os << labels[i] << '\n';
    }
    os << '\n';
  }
  std::istringstream is(os.str());
  return read_conll(is);
}

}  // namespace alwb::testing
