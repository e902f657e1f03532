#include "alwb/vectors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "alwb/errors.hpp"
#include "alwb/rng.hpp"
#include "alwb/text.hpp"

namespace alwb {

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix vectors, SkipGramConfig meta)
    : words_(std::move(words)), vectors_(std::move(vectors)), meta_(meta) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows()) {
    throw DataError("embedding table: word count does not match vector rows");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) {
      throw DataError("embedding table: duplicate token '" + words_[i] + "'");
    }
  }
}

int EmbeddingTable::index_of(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

Vector EmbeddingTable::vector(std::string_view word) const {
  const int i = index_of(word);
  if (i < 0) return Vector::Zero(dim());
  return vectors_.row(i).transpose();
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Element access that is a plain load/store in reference mode and a relaxed
// atomic load/store when several workers share the weights.
template <bool Shared>
struct Cell {
  static double load(double& x) {
    if constexpr (Shared) {
      return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
    } else {
      return x;
    }
  }
  static void store(double& x, double v) {
    if constexpr (Shared) {
      std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
    } else {
      x = v;
    }
  }
};

struct TrainingCorpus {
  std::vector<std::string> words;
  std::vector<std::vector<int>> sentences;
  std::vector<std::int64_t> counts;
  std::vector<double> noise_cdf;
  std::int64_t total = 0;
};

TrainingCorpus build_corpus(const TokenStream& stream, int min_count) {
  std::map<std::string, std::int64_t> freq;
  for (const auto& sent : stream) {
    for (const auto& tok : sent) {
      if (!tok.empty()) ++freq[tok];
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [w, c] : freq) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  if (kept.empty()) throw DataError("empty effective vocabulary");
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  TrainingCorpus c;
  std::unordered_map<std::string, int> index;
  for (auto& [w, n] : kept) {
    index.emplace(w, static_cast<int>(c.words.size()));
    c.words.push_back(w);
    c.counts.push_back(n);
  }
  for (const auto& sent : stream) {
    std::vector<int> ids;
    for (const auto& tok : sent) {
      const auto it = index.find(tok);
      if (it != index.end()) ids.push_back(it->second);
    }
    if (!ids.empty()) {
      c.total += static_cast<std::int64_t>(ids.size());
      c.sentences.push_back(std::move(ids));
    }
  }
  double acc = 0.0;
  for (auto n : c.counts) {
    acc += std::pow(static_cast<double>(n), 0.75);
    c.noise_cdf.push_back(acc);
  }
  for (auto& v : c.noise_cdf) v /= acc;
  return c;
}

int sample_noise(const TrainingCorpus& c, Rng& rng) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(c.noise_cdf.begin(), c.noise_cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - c.noise_cdf.begin(),
                                                   static_cast<std::ptrdiff_t>(c.noise_cdf.size()) - 1));
}

struct EpochTally {
  double loss = 0.0;
  std::int64_t pairs = 0;
};

// One worker's pass over sentences [begin, end) of one epoch.
template <bool Shared>
EpochTally train_range(const TrainingCorpus& c, const SkipGramConfig& cfg, RowMatrix& in, RowMatrix& out,
                       std::size_t begin, std::size_t end, Rng& rng, std::atomic<std::int64_t>& processed,
                       std::int64_t total_work) {
  using C = Cell<Shared>;
  const int dim = cfg.dim;
  EpochTally tally;
  std::vector<double> grad_in(static_cast<std::size_t>(dim));
  std::vector<int> kept;
  const double threshold = cfg.sample * static_cast<double>(c.total);

  for (std::size_t s = begin; s < end; ++s) {
    const auto& sent = c.sentences[s];
    const auto done = processed.fetch_add(static_cast<std::int64_t>(sent.size()), std::memory_order_relaxed);
    const double lr = cfg.learning_rate *
                      std::max(1e-4, 1.0 - static_cast<double>(done) / static_cast<double>(total_work + 1));
    kept.clear();
    for (int w : sent) {
      if (cfg.subsample && threshold > 0) {
        const double f = static_cast<double>(c.counts[static_cast<std::size_t>(w)]);
        const double keep = (std::sqrt(f / threshold) + 1.0) * threshold / f;
        if (keep < uniform01(rng)) continue;
      }
      kept.push_back(w);
    }
    const int n = static_cast<int>(kept.size());
    for (int pos = 0; pos < n; ++pos) {
      const int center = kept[static_cast<std::size_t>(pos)];
      const int shrink = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg.window)));
      const int reach = cfg.window - shrink;
      for (int off = -reach; off <= reach; ++off) {
        const int cpos = pos + off;
        if (off == 0 || cpos < 0 || cpos >= n) continue;
        double* ctx = in.row(kept[static_cast<std::size_t>(cpos)]).data();
        std::fill(grad_in.begin(), grad_in.end(), 0.0);
        for (int d = 0; d <= cfg.negatives; ++d) {
          int target = center;
          double label = 1.0;
          if (d > 0) {
            target = sample_noise(c, rng);
            if (target == center) continue;
            label = 0.0;
          }
          double* tgt = out.row(target).data();
          double f = 0.0;
          for (int k = 0; k < dim; ++k) f += C::load(ctx[k]) * C::load(tgt[k]);
          tally.loss -= label > 0 ? log_sigmoid(f) : log_sigmoid(-f);
          const double g = (label - sigmoid(f)) * lr;
          for (int k = 0; k < dim; ++k) grad_in[static_cast<std::size_t>(k)] += g * C::load(tgt[k]);
          for (int k = 0; k < dim; ++k) C::store(tgt[k], C::load(tgt[k]) + g * C::load(ctx[k]));
        }
        for (int k = 0; k < dim; ++k) C::store(ctx[k], C::load(ctx[k]) + grad_in[static_cast<std::size_t>(k)]);
        ++tally.pairs;
      }
    }
  }
  return tally;
}

}  // namespace

EmbeddingTable train_skipgram(const TokenStream& stream, const SkipGramConfig& config) {
  if (config.dim < 2) throw ConfigError("skip-gram dim must be >= 2");
  if (config.window < 1 || config.negatives < 0 || config.epochs < 1 || config.threads < 1) {
    throw ConfigError("skip-gram window, epochs and threads must be positive");
  }
  const TrainingCorpus c = build_corpus(stream, config.min_count);
  const auto vocab = static_cast<Eigen::Index>(c.words.size());

  Rng init_rng(derive_seed(config.seed, 1));
  RowMatrix in(vocab, config.dim);
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    in.data()[i] = (uniform01(init_rng) - 0.5) / config.dim;
  }
  RowMatrix out = RowMatrix::Zero(vocab, config.dim);

  std::vector<double> losses;
  std::atomic<std::int64_t> processed{0};
  const std::int64_t total_work = c.total * config.epochs;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochTally tally;
    if (config.threads == 1) {
      Rng rng(derive_seed(config.seed, 100 + static_cast<std::uint64_t>(epoch)));
      tally = train_range<false>(c, config, in, out, 0, c.sentences.size(), rng, processed, total_work);
    } else {
      const auto workers = static_cast<std::size_t>(config.threads);
      std::vector<EpochTally> tallies(workers);
      std::vector<std::thread> pool;
      const std::size_t per = (c.sentences.size() + workers - 1) / workers;
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          Rng rng(derive_seed(config.seed, 1000 * (static_cast<std::uint64_t>(epoch) + 1) + t));
          const std::size_t b = std::min(c.sentences.size(), t * per);
          const std::size_t e = std::min(c.sentences.size(), b + per);
          tallies[t] = train_range<true>(c, config, in, out, b, e, rng, processed, total_work);
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& t : tallies) {
        tally.loss += t.loss;
        tally.pairs += t.pairs;
      }
    }
    losses.push_back(tally.pairs > 0 ? tally.loss / static_cast<double>(tally.pairs) : 0.0);
  }

  EmbeddingTable table(c.words, Matrix(in), config);
  table.epoch_loss = std::move(losses);
  return table;
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words()[i];
    for (int k = 0; k < table.dim(); ++k) {
      out << ' ' << text::format_double(table.vectors()(static_cast<Eigen::Index>(i), k));
    }
    out << '\n';
  }
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("embeddings: missing header");
  const auto header = text::split_ws(line);
  if (header.size() != 2) throw DataError("embeddings: header must be '<vocab_size> <dim>'");
  long long vocab = 0;
  long long dim = 0;
  try {
    vocab = text::parse_int(header[0]);
    dim = text::parse_int(header[1]);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("embeddings: ") + e.what());
  }
  if (vocab < 0 || dim < 1) throw DataError("embeddings: bad header");
  std::vector<std::string> words;
  Matrix vecs(vocab, dim);
  for (long long i = 0; i < vocab; ++i) {
    if (!std::getline(in, line)) throw DataError("embeddings: truncated at row " + std::to_string(i));
    const auto parts = text::split(line, ' ');
    if (static_cast<long long>(parts.size()) != dim + 1) {
      throw DataError("embeddings: row " + std::to_string(i) + " has wrong width");
    }
    words.push_back(parts[0]);
    try {
      for (long long k = 0; k < dim; ++k) vecs(i, k) = text::parse_double(parts[static_cast<std::size_t>(k + 1)]);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("embeddings: ") + e.what());
    }
  }
  return EmbeddingTable(std::move(words), std::move(vecs));
}

std::vector<std::string> char_ngrams(std::string_view token, const NgramConfig& config) {
  const auto cps = text::code_points(token);
  std::vector<std::string> padded;
  padded.reserve(cps.size() + 2);
  padded.emplace_back("^");
  padded.insert(padded.end(), cps.begin(), cps.end());
  padded.emplace_back("$");

  std::vector<std::string> out;
  if (config.unigrams) out.insert(out.end(), cps.begin(), cps.end());
  auto windows = [&](std::size_t n) {
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < n; ++k) g += padded[i + k];
      out.push_back(std::move(g));
    }
  };
  if (config.bigrams) windows(2);
  if (config.trigrams) windows(3);
  if (config.tetragrams) windows(4);
  if (config.skipgrams) {
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      if (i == 0 && i + 3 == padded.size()) continue;  // "^_$"
      out.push_back(padded[i] + "_" + padded[i + 2]);
    }
  }
  return out;
}

LexicalTable::LexicalTable(LexicalConfig config) : config_(config) {
  if (config_.dim < 1) throw ConfigError("lexical dim must be >= 1");
}

Vector LexicalTable::ngram_vector(std::string_view ngram) const {
  const std::uint64_t key = derive_seed(config_.seed, fnv1a64(ngram) ^ static_cast<std::uint64_t>(config_.dim));
  Rng rng(key);
  Vector v(config_.dim);
  for (int k = 0; k < config_.dim; ++k) v(k) = standard_normal(rng);
  return normalized_or_zero(v);
}

Vector LexicalTable::lexical_vector(std::string_view token) const {
  Vector acc = Vector::Zero(config_.dim);
  if (token.empty()) return acc;
  for (const auto& g : char_ngrams(token, config_.ngrams)) acc += ngram_vector(g);
  return normalized_or_zero(acc);
}

void write_lexical_meta(std::ostream& out, const LexicalTable& table) {
  const auto& c = table.config();
  const auto& g = c.ngrams;
  out << "lexical " << c.seed << ' ' << c.dim << ' ' << g.unigrams << g.bigrams << g.trigrams << g.tetragrams
      << g.skipgrams << '\n';
}

LexicalTable read_lexical_meta(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("lexical meta: empty");
  const auto parts = text::split_ws(line);
  if (parts.size() != 4 || parts[0] != "lexical" || parts[3].size() != 5 ||
      parts[3].find_first_not_of("01") != std::string::npos) {
    throw DataError("lexical meta: expected 'lexical <seed> <dim> <flags>'");
  }
  LexicalConfig c;
  try {
    c.seed = std::stoull(parts[1]);
    c.dim = static_cast<int>(text::parse_int(parts[2]));
  } catch (const std::exception& e) {
    throw DataError(std::string("lexical meta: ") + e.what());
  }
  const auto& f = parts[3];
  c.ngrams = {f[0] == '1', f[1] == '1', f[2] == '1', f[3] == '1', f[4] == '1'};
  if (c.dim < 1) throw DataError("lexical meta: dim must be positive");
  return LexicalTable(c);
}

}  // namespace alwb
