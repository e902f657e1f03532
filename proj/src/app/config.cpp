#include "alwb/app/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "alwb/errors.hpp"
#include "alwb/text.hpp"

namespace alwb::app {

namespace {

struct Field {
  const char* key;
  const char* description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return text::parse_int(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

int to_positive(const std::string& key, const std::string& v, int min = 1) {
  const auto x = to_int(key, v);
  if (x < min || x > 100000000) throw ConfigError(key + ": must be >= " + std::to_string(min));
  return static_cast<int>(x);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const auto x = to_int(key, v);
  if (x < 0) throw ConfigError(key + ": seed must be non-negative");
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto l = text::to_lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

double to_fraction(const std::string& key, const std::string& v, bool allow_zero = false) {
  const double x = to_double(key, v);
  if (!(x >= 0.0 && x <= 1.0) || (!allow_zero && x == 0.0)) throw ConfigError(key + ": must lie in (0, 1]");
  return x;
}

std::string letters_value(const std::string& key, const std::string& v) {
  std::string out;
  for (char c : v) {
    if (c == ' ' || c == ',') continue;
    if (std::string_view("ABCDGHJKLM").find(c) == std::string_view::npos) {
      throw ConfigError(key + ": unknown feature group '" + std::string(1, c) + "'");
    }
    if (out.find(c) == std::string::npos) out += c;
  }
  if (out.empty()) throw ConfigError(key + ": no feature groups enabled");
  return out;
}

std::string ngram_flags(const NgramConfig& n) {
  std::string s;
  for (bool b : {n.unigrams, n.bigrams, n.trigrams, n.tetragrams, n.skipgrams}) s += b ? '1' : '0';
  return s;
}

NgramConfig parse_ngram_flags(const std::string& key, const std::string& v) {
  if (v.size() != 5 || v.find_first_not_of("01") != std::string::npos) {
    throw ConfigError(key + ": expected five 0/1 flags (uni bi tri tetra skip)");
  }
  return {v[0] == '1', v[1] == '1', v[2] == '1', v[3] == '1', v[4] == '1'};
}

std::string str(double v) { return text::format_double(v); }
std::string str(long long v) { return std::to_string(v); }

#define INT_FIELD(KEY, DESC, MEMBER, MIN)                                                    \
  Field {                                                                                    \
    KEY, DESC, [](RunConfig& c, const std::string& v) { c.MEMBER = to_positive(KEY, v, MIN); }, \
        [](const RunConfig& c) { return str(static_cast<long long>(c.MEMBER)); }             \
  }
#define SEED_FIELD(KEY, DESC, MEMBER)                                                 \
  Field {                                                                             \
    KEY, DESC, [](RunConfig& c, const std::string& v) { c.MEMBER = to_seed(KEY, v); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                   \
  }
#define STR_FIELD(KEY, DESC, MEMBER)                                             \
  Field {                                                                        \
    KEY, DESC, [](RunConfig& c, const std::string& v) { c.MEMBER = v; },         \
        [](const RunConfig& c) { return c.MEMBER; }                              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      STR_FIELD("paths.train", "train corpus (CoNLL: token [pos] label)", train),
      STR_FIELD("paths.test", "test corpus (CoNLL)", test),
      Field{"paths.embed_corpus", "comma-separated plain-text corpora for embeddings, concatenated in order",
            [](RunConfig& c, const std::string& v) {
              c.embed_corpus.clear();
              for (const auto& p : text::split(v, ',')) {
                const auto t = std::string(text::trim(p));
                if (!t.empty()) c.embed_corpus.push_back(t);
              }
            },
            [](const RunConfig& c) { return text::join(c.embed_corpus, ","); }},
      STR_FIELD("paths.lexicon", "lexicon file (term<TAB>group); empty disables group C matches and dki", lexicon),
      STR_FIELD("paths.cache_dir", "artifact cache directory (ALWB_CACHE_DIR overrides)", cache_dir),
      STR_FIELD("paths.out_dir", "output directory", out_dir),

      Field{"features.letters", "enabled feature groups from ABCDGHJKLM",
            [](RunConfig& c, const std::string& v) { c.features.letters = letters_value("features.letters", v); },
            [](const RunConfig& c) { return c.features.letters; }},
      INT_FIELD("features.window", "context window k (both directions)", features.window, 0),
      INT_FIELD("features.max_affix", "longest prefix/suffix length", features.max_affix, 0),

      INT_FIELD("embed.dim", "word vector dimension", embed.dim, 2),
      INT_FIELD("embed.window", "skip-gram window", embed.window, 1),
      INT_FIELD("embed.negatives", "negative samples per pair", embed.negatives, 1),
      INT_FIELD("embed.epochs", "training epochs", embed.epochs, 1),
      INT_FIELD("embed.min_count", "minimum token frequency", embed.min_count, 1),
      Field{"embed.learning_rate", "initial learning rate (linear decay)",
            [](RunConfig& c, const std::string& v) {
              c.embed.learning_rate = to_double("embed.learning_rate", v);
              if (!(c.embed.learning_rate > 0)) throw ConfigError("embed.learning_rate: must be > 0");
            },
            [](const RunConfig& c) { return str(c.embed.learning_rate); }},
      SEED_FIELD("embed.seed", "embedding seed", embed.seed),
      Field{"embed.subsample", "frequent-token subsampling",
            [](RunConfig& c, const std::string& v) { c.embed.subsample = to_bool("embed.subsample", v); },
            [](const RunConfig& c) { return std::string(c.embed.subsample ? "true" : "false"); }},
      INT_FIELD("embed.threads", "worker threads; 1 is the reproducible mode", embed.threads, 1),

      INT_FIELD("lexical.dim", "lexical vector dimension", lexical.dim, 2),
      SEED_FIELD("lexical.seed", "n-gram vector seed", lexical.seed),
      Field{"lexical.ngrams", "n-gram kinds as flags: uni bi tri tetra skip",
            [](RunConfig& c, const std::string& v) { c.lexical.ngrams = parse_ngram_flags("lexical.ngrams", v); },
            [](const RunConfig& c) { return ngram_flags(c.lexical.ngrams); }},

      INT_FIELD("unsup.k_word_fine", "clusters for group D (word vectors)", k_word_fine, 1),
      INT_FIELD("unsup.k_word_coarse", "clusters for group G (word vectors)", k_word_coarse, 1),
      INT_FIELD("unsup.k_lexical", "clusters for group H (lexical vectors)", k_lexical, 1),
      INT_FIELD("unsup.k_bigram", "clusters for groups J and K (bi-gram vectors)", k_bigram, 1),
      INT_FIELD("unsup.k_sentence_coarse", "clusters for group L (sentence vectors)", k_sentence_coarse, 1),
      INT_FIELD("unsup.k_sentence_fine", "clusters for group M (sentence vectors)", k_sentence_fine, 1),
      SEED_FIELD("unsup.seed", "k-means seed", unsup_seed),
      INT_FIELD("unsup.kmeans_iters", "maximum Lloyd iterations", kmeans_iters, 1),
      INT_FIELD("unsup.max_span_points", "cap on bi-gram/sentence points clustered", max_span_points, 1),

      Field{"crf.sigma2", "Gaussian prior variance",
            [](RunConfig& c, const std::string& v) {
              c.crf.sigma2 = to_double("crf.sigma2", v);
              if (!(c.crf.sigma2 > 0)) throw ConfigError("crf.sigma2: must be > 0");
            },
            [](const RunConfig& c) { return str(c.crf.sigma2); }},
      INT_FIELD("crf.max_iterations", "L-BFGS iteration cap", crf.max_iterations, 1),
      Field{"crf.tolerance", "relative objective change for convergence",
            [](RunConfig& c, const std::string& v) {
              c.crf.relative_tolerance = to_double("crf.tolerance", v);
              if (!(c.crf.relative_tolerance > 0)) throw ConfigError("crf.tolerance: must be > 0");
            },
            [](const RunConfig& c) { return str(c.crf.relative_tolerance); }},
      INT_FIELD("crf.threads", "gradient worker threads", crf.threads, 1),

      Field{"al.strategy", "query strategy: rs, lc, idiv, idd, dki",
            [](RunConfig& c, const std::string& v) { c.al.strategy = parse_strategy(v); },
            [](const RunConfig& c) { return std::string(to_string(c.al.strategy)); }},
      Field{"al.init_fraction", "initial labeled fraction of the train set",
            [](RunConfig& c, const std::string& v) {
              c.al.init_fraction = to_fraction("al.init_fraction", v);
              if (c.al.init_fraction >= 1.0) throw ConfigError("al.init_fraction: must be < 1");
            },
            [](const RunConfig& c) { return str(c.al.init_fraction); }},
      Field{"al.batch_size", "sequences per query; 0 means the initial set size",
            [](RunConfig& c, const std::string& v) {
              c.al.batch_size = static_cast<std::size_t>(to_positive("al.batch_size", v, 0));
            },
            [](const RunConfig& c) { return str(static_cast<long long>(c.al.batch_size)); }},
      SEED_FIELD("al.seed", "initial split and random sampling seed", al.seed),
      Field{"al.beta", "IDD density exponent",
            [](RunConfig& c, const std::string& v) { c.al.beta = to_double("al.beta", v); },
            [](const RunConfig& c) { return str(c.al.beta); }},
      Field{"al.lambda", "DKI weight of domain knowledge",
            [](RunConfig& c, const std::string& v) { c.al.lambda = to_fraction("al.lambda", v, true); },
            [](const RunConfig& c) { return str(c.al.lambda); }},
      Field{"al.target_f1", "stop once test F1 reaches this; 'auto' trains the full supervised model",
            [](RunConfig& c, const std::string& v) {
              if (text::to_lower(v) == "auto" || v.empty()) {
                c.target_f1.reset();
              } else {
                c.target_f1 = to_double("al.target_f1", v);
              }
            },
            [](const RunConfig& c) { return c.target_f1 ? str(*c.target_f1) : std::string("auto"); }},

      SEED_FIELD("ttest.seed", "seed of the five random halvings", ttest_seed),
      Field{"ttest.letters_b", "feature groups of the second system (the first uses features.letters)",
            [](RunConfig& c, const std::string& v) { c.ttest_letters_b = letters_value("ttest.letters_b", v); },
            [](const RunConfig& c) { return c.ttest_letters_b; }},

      SEED_FIELD("synth.seed", "generator seed", synth.seed),
      INT_FIELD("synth.sentences", "labeled sentences (train + test)", synth.sentences, 2),
      Field{"synth.test_fraction", "share of labeled sentences used for test",
            [](RunConfig& c, const std::string& v) {
              c.synth.test_fraction = to_fraction("synth.test_fraction", v);
              if (c.synth.test_fraction >= 1.0) throw ConfigError("synth.test_fraction: must be < 1");
            },
            [](const RunConfig& c) { return str(c.synth.test_fraction); }},
      INT_FIELD("synth.embed_sentences", "unlabeled sentences for the embedding corpus", synth.embed_sentences, 1),
      INT_FIELD("synth.vocab_per_class", "distinct words per concept class", synth.vocab_per_class, 4),
      Field{"synth.zipf", "Zipf exponent of word frequencies",
            [](RunConfig& c, const std::string& v) { c.synth.zipf = to_double("synth.zipf", v); },
            [](const RunConfig& c) { return str(c.synth.zipf); }},
      Field{"synth.boilerplate", "share of concept-free template sentences",
            [](RunConfig& c, const std::string& v) { c.synth.boilerplate = to_fraction("synth.boilerplate", v, true); },
            [](const RunConfig& c) { return str(c.synth.boilerplate); }},
      Field{"synth.lexicon_coverage", "share of concept words listed in the lexicon",
            [](RunConfig& c, const std::string& v) {
              c.synth.lexicon_coverage = to_fraction("synth.lexicon_coverage", v, true);
            },
            [](const RunConfig& c) { return str(c.synth.lexicon_coverage); }},
  };
  return table;
}

#undef INT_FIELD
#undef SEED_FIELD
#undef STR_FIELD

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

UnsupFeatureConfig RunConfig::unsup_groups() const {
  UnsupFeatureConfig c;
  c.groups = {
      {'D', {Space::word, k_word_fine, Scope::window}},
      {'G', {Space::word, k_word_coarse, Scope::window}},
      {'H', {Space::lexical, k_lexical, Scope::window}},
      {'J', {Space::bigram, k_bigram, Scope::left_bigram}},
      {'K', {Space::bigram, k_bigram, Scope::right_bigram}},
      {'L', {Space::sentence, k_sentence_coarse, Scope::sentence}},
      {'M', {Space::sentence, k_sentence_fine, Scope::sentence}},
  };
  return c;
}

std::string RunConfig::unsup_letters() const {
  std::string out;
  for (char c : features.letters) {
    if (UnsupFeatureConfig::is_unsup_letter(c)) out += c;
  }
  return out;
}

std::vector<KeyDoc> documented_keys() {
  const RunConfig defaults;
  std::vector<KeyDoc> out;
  for (const auto& f : fields()) out.push_back({f.key, f.get(defaults), f.description});
  return out;
}

void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      cfg.set(std::string(text::trim(t.substr(0, eq))), std::string(text::trim(t.substr(eq + 1))));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  apply_config_text(cfg, in, path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  cfg.set(std::string(text::trim(std::string_view(assignment).substr(0, eq))),
          std::string(text::trim(std::string_view(assignment).substr(eq + 1))));
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.entries()) out << k << " = " << v << '\n';
}

}  // namespace alwb::app
