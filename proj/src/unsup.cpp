#include "alwb/unsup.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "alwb/rng.hpp"
#include "alwb/text.hpp"

namespace alwb {

std::string token_key(const Token& token) {
  return token.normalized.empty() ? text::to_lower(token.surface) : token.normalized;
}

std::vector<std::string> token_keys(const Sentence& sentence) {
  std::vector<std::string> keys;
  keys.reserve(sentence.size());
  for (const auto& t : sentence.tokens) keys.push_back(token_key(t));
  return keys;
}

SequenceVector compose_span_vector(std::span<const std::string> tokens, const EmbeddingTable& emb,
                                   const LexicalTable& lex) {
  Vector lex_sum = Vector::Zero(lex.dim());
  Vector word_sum = Vector::Zero(emb.dim());
  for (const auto& tok : tokens) {
    lex_sum += lex.lexical_vector(tok);
    if (tok == kPadToken) continue;
    const int row = emb.index_of(tok);
    if (row >= 0) word_sum += emb.vectors().row(row).transpose();
  }
  SequenceVector out;
  out.lex_part = normalized_or_zero(lex_sum);
  out.word_part = normalized_or_zero(word_sum);
  Vector both(lex.dim() + emb.dim());
  both << out.lex_part, out.word_part;
  out.combined = normalized_or_zero(both);
  return out;
}

std::string_view to_string(Space space) {
  switch (space) {
    case Space::word: return "word";
    case Space::lexical: return "lexical";
    case Space::bigram: return "bigram";
    case Space::sentence: return "sentence";
  }
  return "word";
}

Space parse_space(std::string_view name) {
  if (name == "word") return Space::word;
  if (name == "lexical") return Space::lexical;
  if (name == "bigram") return Space::bigram;
  if (name == "sentence") return Space::sentence;
  throw DataError("unknown codebook space '" + std::string(name) + "'");
}

std::size_t count_distinct_rows(const Eigen::Ref<const Matrix>& points) {
  std::set<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index j = 0; j < points.cols(); ++j) r[static_cast<std::size_t>(j)] = points(i, j);
    rows.insert(std::move(r));
  }
  return rows.size();
}

namespace {

// Squared distances (up to the per-point constant ||x||^2) to every centroid.
void nearest_centroids(const Eigen::Ref<const Matrix>& points, const Matrix& centroids, std::vector<int>& assign) {
  const Vector cnorm = centroids.rowwise().squaredNorm();
  constexpr Eigen::Index kBlock = 1024;
  for (Eigen::Index start = 0; start < points.rows(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, points.rows() - start);
    Matrix d = -2.0 * points.middleRows(start, rows) * centroids.transpose();
    d.rowwise() += cnorm.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::Index best = 0;
      d.row(i).minCoeff(&best);
      assign[static_cast<std::size_t>(start + i)] = static_cast<int>(best);
    }
  }
}

double objective(const Eigen::Ref<const Matrix>& points, const Matrix& centroids, const std::vector<int>& assign) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

}  // namespace

KMeansResult kmeans(const Eigen::Ref<const Matrix>& points, const KMeansOptions& options) {
  const int k = options.k;
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  const auto n = points.rows();
  if (static_cast<std::size_t>(n) < static_cast<std::size_t>(k) ||
      count_distinct_rows(points) < static_cast<std::size_t>(k)) {
    throw DataError("kmeans: fewer than k=" + std::to_string(k) + " distinct vectors");
  }
  if (!points.allFinite()) throw DataError("kmeans: non-finite input");

  Rng rng(derive_seed(options.seed, 0x6b6d65616e73ULL));
  Matrix centroids(k, points.cols());
  // k-means++ seeding
  const auto first = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centroids.row(0) = points.row(first);
  Vector dist2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    double target = uniform01(rng) * total;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist2(i) <= 0.0) continue;
      pick = i;
      target -= dist2(i);
      if (target < 0.0) break;
    }
    centroids.row(c) = points.row(pick);
    dist2 = dist2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult result;
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n), 0);
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    nearest_centroids(points, centroids, next);
    result.objective.push_back(objective(points, centroids, next));
    if (next == assign) break;
    assign = next;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      // an emptied cluster keeps its previous centroid
      if (counts[static_cast<std::size_t>(c)] > 0) centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
  }
  if (assign.front() < 0) assign = next;
  result.iterations = iter;
  result.assignment = std::move(assign);
  result.codebook = Codebook{std::move(centroids), options.space, options.seed};
  return result;
}

void write_codebook(std::ostream& out, const Codebook& cb) {
  out << cb.k() << ' ' << cb.dim() << ' ' << to_string(cb.space) << ' ' << cb.seed << '\n';
  for (int i = 0; i < cb.k(); ++i) {
    for (int j = 0; j < cb.dim(); ++j) {
      if (j) out << ' ';
      out << text::format_double(cb.centroids(i, j));
    }
    out << '\n';
  }
}

Codebook read_codebook(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("codebook: missing header");
  const auto h = text::split_ws(line);
  if (h.size() != 4) throw DataError("codebook: header must be 'k dim space seed'");
  Codebook cb;
  long long k = 0;
  long long dim = 0;
  try {
    k = text::parse_int(h[0]);
    dim = text::parse_int(h[1]);
    cb.seed = std::stoull(h[3]);
  } catch (const std::exception& e) {
    throw DataError(std::string("codebook: ") + e.what());
  }
  if (k < 1 || dim < 1) throw DataError("codebook: bad header");
  cb.space = parse_space(h[2]);
  cb.centroids.resize(k, dim);
  for (long long i = 0; i < k; ++i) {
    if (!std::getline(in, line)) throw DataError("codebook: truncated");
    const auto parts = text::split_ws(line);
    if (static_cast<long long>(parts.size()) != dim) throw DataError("codebook: row width mismatch");
    try {
      for (long long j = 0; j < dim; ++j) cb.centroids(i, j) = text::parse_double(parts[static_cast<std::size_t>(j)]);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("codebook: ") + e.what());
    }
  }
  if (!cb.centroids.allFinite()) throw DataError("codebook: non-finite centroid");
  return cb;
}

Matrix word_space_points(const EmbeddingTable& emb) {
  Matrix pts = emb.vectors();
  for (Eigen::Index i = 0; i < pts.rows(); ++i) pts.row(i) = normalized_or_zero(pts.row(i).transpose()).transpose();
  return pts;
}

Matrix lexical_space_points(const EmbeddingTable& emb, const LexicalTable& lex) {
  Matrix pts(static_cast<Eigen::Index>(emb.size()), lex.dim());
  for (std::size_t i = 0; i < emb.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = lex.lexical_vector(emb.words()[i]).transpose();
  }
  return pts;
}

namespace {

Matrix span_points(std::vector<std::vector<std::string>> spans, const EmbeddingTable& emb, const LexicalTable& lex,
                   std::size_t max_points, std::uint64_t seed) {
  if (spans.size() > max_points) {
    Rng rng(derive_seed(seed, 0x7370616e73ULL));
    shuffle(spans, rng);
    spans.resize(max_points);
    std::sort(spans.begin(), spans.end());
  }
  Matrix pts(static_cast<Eigen::Index>(spans.size()), lex.dim() + emb.dim());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = compose_span_vector(spans[i], emb, lex).combined.transpose();
  }
  return pts;
}

}  // namespace

Matrix bigram_space_points(const TokenStream& stream, const EmbeddingTable& emb, const LexicalTable& lex,
                           std::size_t max_points, std::uint64_t seed) {
  std::set<std::vector<std::string>> distinct;
  const std::string pad(kPadToken);
  for (const auto& sent : stream) {
    std::vector<std::string> toks;
    for (const auto& t : sent) {
      if (!t.empty()) toks.push_back(t);
    }
    if (toks.empty()) continue;
    distinct.insert({pad, toks.front()});
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) distinct.insert({toks[i], toks[i + 1]});
    distinct.insert({toks.back(), pad});
  }
  return span_points({distinct.begin(), distinct.end()}, emb, lex, max_points, seed);
}

Matrix sentence_space_points(const TokenStream& stream, const EmbeddingTable& emb, const LexicalTable& lex,
                             std::size_t max_points, std::uint64_t seed) {
  std::set<std::vector<std::string>> distinct;
  for (const auto& sent : stream) {
    std::vector<std::string> toks;
    for (const auto& t : sent) {
      if (!t.empty()) toks.push_back(t);
    }
    if (!toks.empty()) distinct.insert(std::move(toks));
  }
  return span_points({distinct.begin(), distinct.end()}, emb, lex, max_points, seed);
}

UnsupFeatureConfig UnsupFeatureConfig::defaults() {
  UnsupFeatureConfig c;
  c.groups = {
      {'D', {Space::word, 500, Scope::window}},        {'G', {Space::word, 100, Scope::window}},
      {'H', {Space::lexical, 500, Scope::window}},     {'J', {Space::bigram, 500, Scope::left_bigram}},
      {'K', {Space::bigram, 500, Scope::right_bigram}}, {'L', {Space::sentence, 100, Scope::sentence}},
      {'M', {Space::sentence, 500, Scope::sentence}},
  };
  return c;
}

bool UnsupFeatureConfig::is_unsup_letter(char letter) {
  return std::string_view("DGHJKLM").find(letter) != std::string_view::npos;
}

TokenFeatures emit_unsup_features(const Sentence& sentence, const UnsupResources& res,
                                  const UnsupFeatureConfig& cfg, std::string_view letters, int window) {
  const auto n = static_cast<int>(sentence.size());
  TokenFeatures out(static_cast<std::size_t>(n));
  const auto keys = token_keys(sentence);
  const std::string pad(kPadToken);

  for (char letter : letters) {
    if (!UnsupFeatureConfig::is_unsup_letter(letter)) continue;
    const auto g = cfg.groups.find(letter);
    if (g == cfg.groups.end()) throw ConfigError(std::string("no unsupervised group definition for ") + letter);
    const UnsupGroup& group = g->second;
    if (res.codebooks == nullptr || res.embeddings == nullptr || res.lexical == nullptr) {
      throw ConfigError(std::string("group ") + letter + " needs embeddings, lexical table and codebooks");
    }
    const auto cb_it = res.codebooks->find({group.space, group.k});
    if (cb_it == res.codebooks->end()) {
      throw ConfigError(std::string("missing codebook for group ") + letter + " (" +
                        std::string(to_string(group.space)) + ", k=" + std::to_string(group.k) + ")");
    }
    const Codebook& cb = cb_it->second;
    const std::string tag(1, letter);
    auto cid = [](int c) { return "c" + std::to_string(c); };

    switch (group.scope) {
      case Scope::window: {
        std::vector<std::string> ids(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
          const auto& key = keys[static_cast<std::size_t>(i)];
          if (group.space == Space::lexical) {
            ids[static_cast<std::size_t>(i)] = cid(assign_cluster(res.lexical->lexical_vector(key), cb));
          } else {
            const int row = res.embeddings->index_of(key);
            ids[static_cast<std::size_t>(i)] =
                row < 0 ? "oov"
                        : cid(assign_cluster(normalized_or_zero(res.embeddings->vectors().row(row).transpose()), cb));
          }
        }
        for (int i = 0; i < n; ++i) {
          for (int o = -window; o <= window; ++o) {
            const int j = i + o;
            if (j < 0 || j >= n) continue;
            out[static_cast<std::size_t>(i)].push_back(tag + "@" + std::to_string(o) + "=" +
                                                       ids[static_cast<std::size_t>(j)]);
          }
        }
        break;
      }
      case Scope::left_bigram:
      case Scope::right_bigram: {
        const bool left = group.scope == Scope::left_bigram;
        for (int i = 0; i < n; ++i) {
          const std::string& a = left ? (i > 0 ? keys[static_cast<std::size_t>(i - 1)] : pad) : keys[static_cast<std::size_t>(i)];
          const std::string& b =
              left ? keys[static_cast<std::size_t>(i)] : (i + 1 < n ? keys[static_cast<std::size_t>(i + 1)] : pad);
          const std::vector<std::string> span{a, b};
          const auto v = compose_span_vector(span, *res.embeddings, *res.lexical);
          out[static_cast<std::size_t>(i)].push_back(tag + "=" + cid(assign_cluster(v.combined, cb)));
        }
        break;
      }
      case Scope::sentence: {
        const auto v = compose_span_vector(keys, *res.embeddings, *res.lexical);
        const std::string f = tag + "=" + cid(assign_cluster(v.combined, cb));
        for (auto& feats : out) feats.push_back(f);
        break;
      }
    }
  }
  return out;
}

}  // namespace alwb
