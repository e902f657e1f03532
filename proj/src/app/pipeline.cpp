#include "alwb/app/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "alwb/errors.hpp"
#include "alwb/text.hpp"

namespace fs = std::filesystem;

namespace alwb::app {

TokenStream read_token_stream(const std::vector<std::string>& paths) {
  TokenStream stream;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open embedding corpus " + p);
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> toks;
      for (const auto& t : text::split_ws(line)) {
        auto key = preprocess(t);
        toks.push_back(key.empty() ? text::to_lower(t) : std::move(key));
      }
      if (!toks.empty()) stream.push_back(std::move(toks));
    }
  }
  return stream;
}

Workbench::Workbench(RunConfig config, RunLog& log)
    : cfg_(std::move(config)),
      log_(log),
      cache_(ArtifactCache::resolve_dir(cfg_.cache_dir)),
      lexical_(cfg_.lexical) {}

const Corpus& Workbench::train() {
  if (!train_) {
    if (cfg_.train.empty()) throw ConfigError("paths.train is not set");
    hashes_["train"] = file_hash(cfg_.train);
    train_ = read_conll_file(cfg_.train);
  }
  return *train_;
}

const Corpus& Workbench::test() {
  if (!test_) {
    if (cfg_.test.empty()) throw ConfigError("paths.test is not set");
    hashes_["test"] = file_hash(cfg_.test);
    test_ = read_conll_file(cfg_.test);
  }
  return *test_;
}

const Lexicon* Workbench::lexicon() {
  if (!lexicon_loaded_) {
    lexicon_loaded_ = true;
    if (!cfg_.lexicon.empty()) {
      hashes_["lexicon"] = file_hash(cfg_.lexicon);
      lexicon_ = read_lexicon_file(cfg_.lexicon);
    }
  }
  return lexicon_ ? &*lexicon_ : nullptr;
}

std::string Workbench::embeddings_key() {
  if (cfg_.embed_corpus.empty()) throw ConfigError("paths.embed_corpus is not set");
  KeyHasher h;
  h.add("embeddings-v1");
  for (std::size_t i = 0; i < cfg_.embed_corpus.size(); ++i) {
    const auto fh = file_hash(cfg_.embed_corpus[i]);
    hashes_["embed_corpus." + std::to_string(i)] = fh;
    h.add(fh);
  }
  const auto& e = cfg_.embed;
  h.add(e.dim).add(e.window).add(e.negatives).add(e.epochs).add(e.min_count);
  h.add(text::format_double(e.learning_rate)).add(static_cast<long long>(e.seed));
  h.add(e.subsample ? "sub" : "nosub").add(text::format_double(e.sample)).add(e.threads);
  return h.hex();
}

const EmbeddingTable& Workbench::embeddings() {
  if (embeddings_) return *embeddings_;
  const auto key = embeddings_key();
  hashes_["embeddings"] = key;
  cache_.fetch(
      "embeddings", key,
      [&](const fs::path& dir) {
        log_.info("training embeddings");
        if (!stream_) stream_ = read_token_stream(cfg_.embed_corpus);
        const auto table = train_skipgram(*stream_, cfg_.embed);
        std::ofstream out(dir / "embeddings.txt");
        write_embeddings(out, table);
        if (!out) throw DataError("cannot write embeddings");
      },
      [&](const fs::path& dir) {
        std::ifstream in(dir / "embeddings.txt");
        if (!in) throw DataError("missing embeddings.txt");
        embeddings_ = read_embeddings(in);
      },
      log_);
  if (cfg_.embed.threads > 1) log_.warn("embed.threads > 1: embeddings are not bit-reproducible");
  return *embeddings_;
}

std::string Workbench::codebook_key(Space space, int k) {
  KeyHasher h;
  h.add("codebook-v1").add(embeddings_key()).add(std::string(to_string(space))).add(k);
  h.add(static_cast<long long>(cfg_.unsup_seed)).add(cfg_.kmeans_iters);
  if (space != Space::word) {
    std::ostringstream lex;
    write_lexical_meta(lex, lexical_);
    h.add(lex.str());
  }
  if (space == Space::bigram || space == Space::sentence) h.add(cfg_.max_span_points);
  return h.hex();
}

Codebook Workbench::build_codebook(Space space, int k) {
  const auto& emb = embeddings();
  Matrix points;
  const auto cap = static_cast<std::size_t>(cfg_.max_span_points);
  switch (space) {
    case Space::word: points = word_space_points(emb); break;
    case Space::lexical: points = lexical_space_points(emb, lexical_); break;
    case Space::bigram:
    case Space::sentence:
      if (!stream_) stream_ = read_token_stream(cfg_.embed_corpus);
      points = space == Space::bigram ? bigram_space_points(*stream_, emb, lexical_, cap, cfg_.unsup_seed)
                                      : sentence_space_points(*stream_, emb, lexical_, cap, cfg_.unsup_seed);
      break;
  }
  KMeansOptions opts;
  opts.k = k;
  opts.seed = cfg_.unsup_seed;
  opts.max_iters = cfg_.kmeans_iters;
  opts.space = space;
  const auto distinct = count_distinct_rows(points);
  if (distinct == 0) throw DataError("no points to cluster in space " + std::string(to_string(space)));
  if (static_cast<std::size_t>(k) > distinct) {
    opts.k = static_cast<int>(distinct);
    log_.warn("k=" + std::to_string(k) + " exceeds the " + std::to_string(distinct) + " distinct " +
              std::string(to_string(space)) + " vectors; using k=" + std::to_string(opts.k));
  }
  log_.info("clustering " + std::to_string(points.rows()) + " " + std::string(to_string(space)) +
            " vectors into " + std::to_string(opts.k) + " clusters");
  return kmeans(points, opts).codebook;
}

const CodebookSet& Workbench::codebooks(const std::string& letters) {
  const auto groups = cfg_.unsup_groups();
  for (char letter : letters) {
    if (!UnsupFeatureConfig::is_unsup_letter(letter)) continue;
    const auto& g = groups.groups.at(letter);
    const CodebookKey ck{g.space, g.k};
    if (codebooks_.count(ck)) continue;
    const auto key = codebook_key(g.space, g.k);
    hashes_["codebook." + std::string(to_string(g.space)) + "." + std::to_string(g.k)] = key;
    cache_.fetch(
        "codebook", key,
        [&](const fs::path& dir) {
          std::ofstream out(dir / "codebook.txt");
          write_codebook(out, build_codebook(g.space, g.k));
          if (!out) throw DataError("cannot write codebook");
        },
        [&](const fs::path& dir) {
          std::ifstream in(dir / "codebook.txt");
          if (!in) throw DataError("missing codebook.txt");
          auto cb = read_codebook(in);
          if (cb.space != g.space || cb.k() > g.k) throw DataError("codebook does not match its key");
          codebooks_[ck] = std::move(cb);
        },
        log_);
  }
  return codebooks_;
}

std::vector<FeatureVector> Workbench::featurize(const Corpus& corpus, const std::string& letters) {
  FeatureGroupConfig fc = cfg_.features;
  fc.letters = letters;
  if (fc.enabled('B') && !corpus.has_pos()) {
    log_.warn("POS column missing; feature group B is empty");
  }
  const bool unsup = letters.find_first_of("DGHJKLM") != std::string::npos;
  UnsupResources res;
  if (unsup) res = {&embeddings(), &lexical_, &codebooks(letters)};
  const auto groups = cfg_.unsup_groups();
  const Lexicon* lex = lexicon();
  std::vector<FeatureVector> out(corpus.size());
  for (const auto& s : corpus.sentences) {
    out[static_cast<std::size_t>(s.seq_id)] = assemble(s, fc, lex, unsup ? &res : nullptr, groups);
  }
  return out;
}

const SentenceReps& Workbench::train_reps() {
  if (!reps_) reps_ = SentenceReps::build(train(), embeddings(), lexical_);
  return *reps_;
}

std::string Workbench::supervised_key(const std::string& letters) {
  train();
  test();
  lexicon();
  KeyHasher h;
  h.add("supervised-v1").add(hashes_.at("train")).add(hashes_.at("test"));
  h.add(hashes_.count("lexicon") ? hashes_.at("lexicon") : "-");
  h.add(letters).add(cfg_.features.window).add(cfg_.features.max_affix);
  h.add(text::format_double(cfg_.crf.sigma2)).add(cfg_.crf.max_iterations);
  h.add(text::format_double(cfg_.crf.relative_tolerance)).add(cfg_.crf.threads);
  const auto groups = cfg_.unsup_groups();
  for (char letter : letters) {
    if (!UnsupFeatureConfig::is_unsup_letter(letter)) continue;
    const auto& g = groups.groups.at(letter);
    h.add(std::string(1, letter)).add(codebook_key(g.space, g.k));
  }
  if (letters.find_first_of("HJKLM") != std::string::npos) {
    std::ostringstream lex;
    write_lexical_meta(lex, lexical_);
    h.add(lex.str());
  }
  return h.hex();
}

SupervisedResult Workbench::supervised(const std::string& letters) {
  const auto key = supervised_key(letters);
  hashes_["supervised." + letters] = key;

  SupervisedResult result;
  result.cache_hit = cache_.fetch(
      "supervised", key,
      [&](const fs::path& dir) {
        log_.info("training supervised model (" + letters + ")");
        const auto train_f = featurize(train(), letters);
        const auto test_f = featurize(test(), letters);
        const auto model = train_supervised(train_f, train(), cfg_.crf);
        const auto prf = evaluate_model(model, test_f, test());
        std::ofstream m(dir / "model.txt");
        write_model(m, model);
        std::ofstream p(dir / "prf.txt");
        p << prf.tp << ' ' << prf.fp << ' ' << prf.fn << '\n';
        if (!m || !p) throw DataError("cannot write supervised artifacts");
      },
      [&](const fs::path& dir) {
        std::ifstream m(dir / "model.txt");
        result.model = read_model(m);
        std::ifstream p(dir / "prf.txt");
        std::size_t tp = 0, fp = 0, fn = 0;
        if (!(p >> tp >> fp >> fn)) throw DataError("bad prf.txt");
        result.test = PRF::from_counts(tp, fp, fn);
      },
      log_);
  return result;
}

}  // namespace alwb::app
