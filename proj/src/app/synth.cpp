#include "alwb/app/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"

namespace fs = std::filesystem;

namespace alwb::app {

namespace {

struct WordClass {
  std::string type;  ///< concept type, empty for the distractor class
  std::string group; ///< lexicon group tag
  std::vector<std::string> words;
  std::vector<double> cdf;  ///< Zipf over words
  std::vector<std::string> modifiers;
};

struct Cue {
  std::string word;
  std::vector<double> cdf;  ///< over classes
};

struct Tagged {
  std::string word;
  std::string pos;
  std::string label;
};

std::size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

std::vector<double> zipf_cdf(std::size_t n, double s) {
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
    cdf[r] = acc;
  }
  return cdf;
}

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string make(int min_syll, int max_syll) {
    static const std::string cons = "bdfgklmnprstvz";
    static const std::string vow = "aeiou";
    while (true) {
      const int n = min_syll + static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(max_syll - min_syll + 1)));
      std::string w;
      for (int i = 0; i < n; ++i) {
        w += cons[uniform_index(rng_, cons.size())];
        w += vow[uniform_index(rng_, vow.size())];
      }
      if (uniform01(rng_) < 0.3) w += cons[uniform_index(rng_, cons.size())];
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> make_many(std::size_t n, int min_syll, int max_syll) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make(min_syll, max_syll));
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

class Grammar {
 public:
  Grammar(const SynthConfig& cfg, Rng& rng) : cfg_(cfg) {
    WordFactory words(rng);
    const std::vector<std::pair<std::string, std::string>> types{
        {"problem", "DISO"}, {"treatment", "CHEM"}, {"test", "PROC"}, {"", ""}};
    const auto vocab = static_cast<std::size_t>(cfg.vocab_per_class);
    for (const auto& [type, group] : types) {
      WordClass c;
      c.type = type;
      c.group = group;
      c.words = words.make_many(vocab, 2, 3);
      c.cdf = zipf_cdf(vocab, cfg.zipf);
      c.modifiers = words.make_many(8, 2, 3);
      classes_.push_back(std::move(c));
    }
    function_words_ = words.make_many(20, 1, 1);
    for (int i = 0; i < 16; ++i) {
      Cue cue{words.make(1, 2), {}};
      const auto primary = static_cast<std::size_t>(i) % classes_.size();
      double acc = 0.0;
      for (std::size_t c = 0; c < classes_.size(); ++c) {
        acc += c == primary ? 0.5 : 0.5 / static_cast<double>(classes_.size() - 1);
        cue.cdf.push_back(acc);
      }
      cues_.push_back(std::move(cue));
    }
    const auto& filler = classes_.back();
    for (int t = 0; t < 25; ++t) {
      std::vector<Tagged> tmpl;
      const auto n = 3 + uniform_index(rng, 6);
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = uniform_index(rng, 3);
        if (r == 0) {
          tmpl.push_back({function_words_[uniform_index(rng, function_words_.size())], "IN", "O"});
        } else if (r == 1) {
          tmpl.push_back({cues_[uniform_index(rng, cues_.size())].word, "VB", "O"});
        } else {
          tmpl.push_back({filler.words[uniform_index(rng, std::min<std::size_t>(20, filler.words.size()))], "NN", "O"});
        }
      }
      tmpl.push_back({".", ".", "O"});
      templates_.push_back(std::move(tmpl));
    }
    template_cdf_ = zipf_cdf(templates_.size(), 1.0);
  }

  std::vector<Tagged> sentence(Rng& rng) const {
    if (uniform01(rng) < cfg_.boilerplate) return templates_[sample_cdf(template_cdf_, rng)];
    std::vector<Tagged> out;
    const auto clauses = 1 + uniform_index(rng, 3);
    for (std::size_t k = 0; k < clauses; ++k) {
      if (k > 0) {
        if (uniform01(rng) < 0.5) {
          out.push_back({",", ",", "O"});
        } else {
          out.push_back({function_words_[uniform_index(rng, 4)], "CC", "O"});
        }
      }
      std::size_t cls;
      if (uniform01(rng) < 0.8) {
        const auto& cue = cues_[uniform_index(rng, cues_.size())];
        out.push_back({cue.word, "VB", "O"});
        cls = sample_cdf(cue.cdf, rng);
      } else {
        cls = uniform_index(rng, classes_.size());
      }
      if (uniform01(rng) < 0.3) {
        out.push_back({function_words_[4 + uniform_index(rng, function_words_.size() - 4)], "IN", "O"});
      }
      const auto& c = classes_[cls];
      if (uniform01(rng) < 0.5) out.push_back({c.modifiers[uniform_index(rng, c.modifiers.size())], "JJ", "O"});
      const double r = uniform01(rng);
      const int len = r < 0.6 ? 1 : (r < 0.9 ? 2 : 3);
      for (int i = 0; i < len; ++i) {
        std::string label = "O";
        if (!c.type.empty()) label = (i == 0 ? "B-" : "I-") + c.type;
        out.push_back({c.words[sample_cdf(c.cdf, rng)], "NN", label});
      }
    }
    out.push_back({".", ".", "O"});
    return out;
  }

  std::vector<std::pair<std::string, std::string>> lexicon(Rng& rng) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : classes_) {
      if (c.type.empty()) continue;
      for (const auto& w : c.words) {
        if (uniform01(rng) < cfg_.lexicon_coverage) out.emplace_back(w, c.group);
      }
    }
    return out;
  }

 private:
  const SynthConfig& cfg_;
  std::vector<WordClass> classes_;
  std::vector<Cue> cues_;
  std::vector<std::string> function_words_;
  std::vector<std::vector<Tagged>> templates_;
  std::vector<double> template_cdf_;
};

Sentence to_sentence(const std::vector<Tagged>& tagged, int seq_id, const std::string& doc) {
  Sentence s;
  s.seq_id = seq_id;
  s.doc_id = doc;
  for (const auto& t : tagged) s.tokens.push_back({t.word, preprocess(t.word), t.pos, t.label});
  return s;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& config) {
  if (config.sentences < 2) throw ConfigError("synth.sentences must be >= 2");
  Rng grammar_rng(derive_seed(config.seed, 0x6772616dULL));
  const Grammar grammar(config, grammar_rng);

  SynthCorpus out;
  Rng rng(derive_seed(config.seed, 0x6c61626cULL));
  const auto n_test = std::clamp(static_cast<int>(std::lround(config.test_fraction * config.sentences)), 1,
                                 config.sentences - 1);
  const auto n_train = config.sentences - n_test;
  for (int i = 0; i < config.sentences; ++i) {
    const bool is_test = i >= n_train;
    auto& target = is_test ? out.test : out.train;
    const int id = static_cast<int>(target.sentences.size());
    target.sentences.push_back(to_sentence(grammar.sentence(rng), id, "synth" + std::to_string(id / 20)));
  }
  out.train.refresh();
  out.test.refresh();

  Rng embed_rng(derive_seed(config.seed, 0x656d6264ULL));
  out.embed.reserve(static_cast<std::size_t>(config.embed_sentences));
  for (int i = 0; i < config.embed_sentences; ++i) {
    std::vector<std::string> toks;
    for (const auto& t : grammar.sentence(embed_rng)) toks.push_back(t.word);
    out.embed.push_back(std::move(toks));
  }
  Rng lex_rng(derive_seed(config.seed, 0x6c657869ULL));
  out.lexicon = grammar.lexicon(lex_rng);
  return out;
}

void write_synthetic(const SynthCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw DataError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("train.conll");
    write_conll(f, corpus.train);
  }
  {
    auto f = open("test.conll");
    write_conll(f, corpus.test);
  }
  {
    auto f = open("embed.txt");
    for (const auto& s : corpus.embed) {
      for (std::size_t i = 0; i < s.size(); ++i) f << (i ? " " : "") << s[i];
      f << '\n';
    }
  }
  {
    auto f = open("lexicon.tsv");
    for (const auto& [term, group] : corpus.lexicon) f << term << '\t' << group << '\n';
  }
}

}  // namespace alwb::app
