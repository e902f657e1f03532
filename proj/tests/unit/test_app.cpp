#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "alwb/app/commands.hpp"
#include "alwb/app/synth.hpp"
#include "alwb/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace alwb;
using namespace alwb::app;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("alwb-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

SynthConfig tiny_synth(std::uint64_t seed = 3) {
  SynthConfig s;
  s.seed = seed;
  s.sentences = 80;
  s.embed_sentences = 300;
  s.vocab_per_class = 15;
  return s;
}

/// Synthetic corpus on disk plus a config pointing at it, small enough that
/// every artifact builds in well under a second.
RunConfig tiny_run(const fs::path& dir) {
  ::unsetenv("ALWB_CACHE_DIR");
  write_synthetic(generate_synthetic(tiny_synth()), dir / "data");
  RunConfig cfg;
  cfg.train = (dir / "data" / "train.conll").string();
  cfg.test = (dir / "data" / "test.conll").string();
  cfg.embed_corpus = {(dir / "data" / "embed.txt").string()};
  cfg.lexicon = (dir / "data" / "lexicon.tsv").string();
  cfg.cache_dir = (dir / "cache").string();
  cfg.out_dir = (dir / "out").string();
  cfg.embed.dim = 8;
  cfg.embed.epochs = 1;
  cfg.lexical.dim = 6;
  cfg.k_word_fine = 6;
  cfg.k_word_coarse = 3;
  cfg.k_lexical = 5;
  cfg.k_bigram = 5;
  cfg.k_sentence_coarse = 3;
  cfg.k_sentence_fine = 6;
  cfg.kmeans_iters = 5;
  cfg.max_span_points = 200;
  cfg.crf.max_iterations = 30;
  cfg.al.init_fraction = 0.1;
  return cfg;
}

struct QuietLog : RunLog {
  QuietLog() { quiet = true; }
};

}  // namespace

TEST_CASE("every documented key accepts its own default") {
  std::set<std::string> seen;
  RunConfig cfg;
  for (const auto& k : documented_keys()) {
    CHECK(seen.insert(k.key).second);
    CHECK_FALSE(k.description.empty());
    CHECK_NOTHROW(cfg.set(k.key, k.default_value));
  }
  CHECK(cfg.entries() == RunConfig{}.entries());
}

TEST_CASE("config text round trip") {
  RunConfig cfg;
  apply_override(cfg, "features.letters=ABCDG");
  apply_override(cfg, "crf.sigma2 = 2.5");
  apply_override(cfg, "al.target_f1=0.7");
  apply_override(cfg, "paths.embed_corpus=a.txt, b.txt");
  apply_override(cfg, "lexical.ngrams=10101");
  std::stringstream text;
  write_config(text, cfg);
  RunConfig back;
  apply_config_text(back, text);
  CHECK(back.entries() == cfg.entries());
  CHECK(back.embed_corpus == std::vector<std::string>{"a.txt", "b.txt"});
  CHECK(back.target_f1 == doctest::Approx(0.7));
  CHECK(back.unsup_letters() == "DG");
}

TEST_CASE("config errors name the offending line") {
  RunConfig cfg;
  std::istringstream bad("# comment\nfeatures.window = 3\nno.such.key = 1\n");
  try {
    apply_config_text(cfg, bad, "run.conf");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.conf:3") != std::string::npos);
  }
  CHECK(cfg.features.window == 3);

  CHECK_THROWS_AS(apply_override(cfg, "features.window"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "features.window=two"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "features.window=-1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "features.letters=ABZ"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "al.init_fraction=1.5"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "al.strategy=best"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "embed.subsample=maybe"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "lexical.ngrams=111"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/alwb.conf"), ConfigError);
}

TEST_CASE("key hasher separates field boundaries") {
  CHECK(KeyHasher().add("ab").add("c").hex() != KeyHasher().add("a").add("bc").hex());
  CHECK(KeyHasher().add("x").hex() == KeyHasher().add("x").hex());
  CHECK(KeyHasher().add(12).hex() == KeyHasher().add("12").hex());
  CHECK(bytes_hash("").size() == 16);
}

TEST_CASE("artifact cache: miss, hit, corruption and failed builds") {
  TempDir tmp;
  QuietLog log;
  ArtifactCache cache(tmp.path / "c");
  int builds = 0;
  std::string loaded;
  auto build = [&](const fs::path& d) {
    ++builds;
    spit(d / "payload.txt", "hello");
  };
  auto load = [&](const fs::path& d) { loaded = slurp(d / "payload.txt"); };

  CHECK_FALSE(cache.fetch("thing", "k1", build, load, log));
  CHECK(cache.fetch("thing", "k1", build, load, log));
  CHECK(builds == 1);
  CHECK(loaded == "hello");
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);

  spit(cache.entry_path("thing", "k1") / "payload.txt", "tampered");
  CHECK_FALSE(cache.fetch("thing", "k1", build, load, log));
  CHECK(builds == 2);
  CHECK(loaded == "hello");
  REQUIRE(log.warnings.size() == 1);
  CHECK(log.warnings[0].find("corrupt cache entry") != std::string::npos);

  CHECK_THROWS_AS(cache.fetch(
                      "thing", "k2", [](const fs::path&) { throw DataError("boom"); }, load, log),
                  DataError);
  CHECK_FALSE(fs::exists(cache.entry_path("thing", "k2")));
  CHECK_FALSE(fs::exists(cache.entry_path("thing", "k2").string() + ".tmp"));
}

TEST_CASE("ALWB_CACHE_DIR overrides the configured cache directory") {
  ::setenv("ALWB_CACHE_DIR", "/tmp/alwb-env-cache", 1);
  CHECK(ArtifactCache::resolve_dir("configured") == fs::path("/tmp/alwb-env-cache"));
  ::unsetenv("ALWB_CACHE_DIR");
  CHECK(ArtifactCache::resolve_dir("configured") == fs::path("configured"));
}

TEST_CASE("synthetic corpus is deterministic and well formed") {
  const auto a = generate_synthetic(tiny_synth(5));
  const auto b = generate_synthetic(tiny_synth(5));
  const auto c = generate_synthetic(tiny_synth(6));
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.embed == b.embed);
  CHECK(a.lexicon == b.lexicon);
  CHECK_FALSE(a.train == c.train);
  CHECK(a.train.size() + a.test.size() == 80);
  CHECK(a.test.size() == 20);
  CHECK(a.embed.size() == 300);
  CHECK(a.train.label_alphabet.front() == "O");
  for (const auto& s : a.train.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& l = s.tokens[i].gold;
      CHECK(is_valid_bio_label(l));
      if (l.rfind("I-", 0) == 0) {
        REQUIRE(i > 0);
        CHECK(s.tokens[i - 1].gold.substr(2) == l.substr(2));
      }
    }
  }
  for (const auto& [term, group] : a.lexicon) CHECK((group == "DISO" || group == "CHEM" || group == "PROC"));

  SynthConfig bad = tiny_synth();
  bad.sentences = 1;
  CHECK_THROWS_AS(generate_synthetic(bad), ConfigError);
}

TEST_CASE("artifact keys react to every setting they depend on") {
  TempDir tmp;
  const RunConfig base = tiny_run(tmp.path);
  const std::string all = "ABCDGHJKLM";
  spit(tmp.path / "embed2.txt", slurp(base.embed_corpus[0]) + "extra line\n");
  spit(tmp.path / "train2.conll", slurp(base.train) + "\nzz\tNN\tO\n");
  spit(tmp.path / "test2.conll", slurp(base.test) + "\nzz\tNN\tO\n");
  spit(tmp.path / "lex2.tsv", slurp(base.lexicon) + "zzz\tDISO\n");

  const std::map<std::string, std::string> mutated{
      {"paths.train", (tmp.path / "train2.conll").string()},
      {"paths.test", (tmp.path / "test2.conll").string()},
      {"paths.embed_corpus", (tmp.path / "embed2.txt").string()},
      {"paths.lexicon", (tmp.path / "lex2.tsv").string()},
      {"features.window", "1"},
      {"features.max_affix", "3"},
      {"embed.dim", "9"},
      {"embed.window", "2"},
      {"embed.negatives", "3"},
      {"embed.epochs", "2"},
      {"embed.min_count", "1"},
      {"embed.learning_rate", "0.05"},
      {"embed.seed", "9"},
      {"embed.subsample", "true"},
      {"embed.threads", "2"},
      {"lexical.dim", "7"},
      {"lexical.seed", "8"},
      {"lexical.ngrams", "11110"},
      {"unsup.k_word_fine", "7"},
      {"unsup.k_word_coarse", "4"},
      {"unsup.k_lexical", "4"},
      {"unsup.k_bigram", "4"},
      {"unsup.k_sentence_coarse", "2"},
      {"unsup.k_sentence_fine", "5"},
      {"unsup.seed", "2"},
      {"unsup.kmeans_iters", "6"},
      {"unsup.max_span_points", "150"},
      {"crf.sigma2", "3"},
      {"crf.max_iterations", "31"},
      {"crf.tolerance", "1e-5"},
      {"crf.threads", "2"},
  };
  // Settings that only steer the loop, the t-test, the generator or output
  // placement must not invalidate the supervised model.
  const std::map<std::string, std::string> irrelevant{
      {"paths.cache_dir", (tmp.path / "cache").string()},
      {"paths.out_dir", "elsewhere"},
      {"al.strategy", "rs"},
      {"al.init_fraction", "0.2"},
      {"al.batch_size", "4"},
      {"al.seed", "5"},
      {"al.beta", "2"},
      {"al.lambda", "0.25"},
      {"al.target_f1", "0.5"},
      {"ttest.seed", "4"},
      {"ttest.letters_b", "AB"},
      {"synth.seed", "4"},
      {"synth.sentences", "100"},
      {"synth.test_fraction", "0.5"},
      {"synth.embed_sentences", "10"},
      {"synth.vocab_per_class", "9"},
      {"synth.zipf", "1.1"},
      {"synth.boilerplate", "0.1"},
      {"synth.lexicon_coverage", "0.9"},
  };
  // features.letters is exercised separately since it is the key argument.
  std::set<std::string> covered{"features.letters"};
  for (const auto& m : {mutated, irrelevant}) {
    for (const auto& [k, v] : m) covered.insert(k);
  }
  for (const auto& k : documented_keys()) CHECK_MESSAGE(covered.count(k.key) == 1, k.key);

  QuietLog log;
  Workbench ref(base, log);
  const auto ref_key = ref.supervised_key(all);
  CHECK(ref.supervised_key(all) == ref_key);
  CHECK(ref.supervised_key("ABC") != ref_key);
  for (const auto& [k, v] : mutated) {
    RunConfig cfg = base;
    cfg.set(k, v);
    Workbench wb(cfg, log);
    CHECK_MESSAGE(wb.supervised_key(all) != ref_key, k);
  }
  for (const auto& [k, v] : irrelevant) {
    RunConfig cfg = base;
    cfg.set(k, v);
    Workbench wb(cfg, log);
    CHECK_MESSAGE(wb.supervised_key(all) == ref_key, k);
  }

  // Rewriting a file in place changes its key even though the path is the same.
  RunConfig same_path = base;
  same_path.train = (tmp.path / "train_copy.conll").string();
  fs::copy_file(base.train, same_path.train);
  const auto before = Workbench(same_path, log).supervised_key("ABC");
  spit(same_path.train, slurp(same_path.train) + "\nyy\tNN\tO\n");
  CHECK(Workbench(same_path, log).supervised_key("ABC") != before);
}

TEST_CASE("workbench caches artifacts and clamps oversized k") {
  TempDir tmp;
  RunConfig cfg = tiny_run(tmp.path);
  cfg.k_word_fine = 100000;
  QuietLog log;
  Workbench first(cfg, log);
  const auto r1 = first.supervised("ABCD");
  CHECK_FALSE(r1.cache_hit);
  CHECK(first.cache().misses() == 3);  // embeddings, codebook, model
  bool warned = false;
  for (const auto& w : log.warnings) warned |= w.find("exceeds") != std::string::npos;
  CHECK(warned);

  Workbench second(cfg, log);
  const auto r2 = second.supervised("ABCD");
  CHECK(r2.cache_hit);
  CHECK(second.cache().misses() == 0);
  CHECK(r2.test.f1 == r1.test.f1);
  CHECK(r2.model.weights() == r1.model.weights());
}

TEST_CASE("missing inputs are config errors, unreadable ones data errors") {
  TempDir tmp;
  QuietLog log;
  RunConfig cfg = tiny_run(tmp.path);
  RunConfig no_train = cfg;
  no_train.train.clear();
  CHECK_THROWS_AS(Workbench(no_train, log).train(), ConfigError);
  RunConfig no_embed = cfg;
  no_embed.embed_corpus.clear();
  CHECK_THROWS_AS(Workbench(no_embed, log).featurize(Workbench(cfg, log).train(), "AD"), ConfigError);
  RunConfig gone = cfg;
  gone.test = (tmp.path / "missing.conll").string();
  CHECK_THROWS_AS(Workbench(gone, log).test(), DataError);

  RunConfig dki = cfg;
  dki.lexicon.clear();
  dki.al.strategy = Strategy::dki;
  dki.target_f1 = 0.5;
  Workbench wb(dki, log);
  CHECK_THROWS_AS(run_active_learning(wb), ConfigError);
}

TEST_CASE("al manifest replays to an identical history") {
  TempDir tmp;
  QuietLog log;
  RunConfig cfg = tiny_run(tmp.path);
  cfg.al.strategy = Strategy::idd;
  cfg.features.letters = "ABCG";
  cmd_al(cfg, log, std::nullopt);
  const auto manifest = fs::path(cfg.out_dir) / "manifest.json";
  const auto history = slurp(fs::path(cfg.out_dir) / "history.csv");
  CHECK(history.rfind("iteration,seq_used,tok_used,concept_used,sar,tar,car,precision,recall,f1\n", 0) == 0);
  const auto m = nlohmann::json::parse(slurp(manifest));
  CHECK(m["history_csv"].get<std::string>() == history);
  CHECK(m["kind"] == "al");

  RunConfig replay = cfg;
  replay.out_dir = (tmp.path / "replay").string();
  fs::remove_all(replay.cache_dir);  // force every artifact to be rebuilt
  cmd_al(replay, log, manifest.string());
  CHECK(slurp(fs::path(replay.out_dir) / "history.csv") == history);

  auto tampered = m;
  tampered["hashes"]["train"] = "0000000000000000";
  spit(tmp.path / "tampered.json", tampered.dump());
  CHECK_THROWS_AS(cmd_al(replay, log, (tmp.path / "tampered.json").string()), DataError);

  auto diverged = m;
  diverged["history_csv"] = history + "extra\n";
  spit(tmp.path / "diverged.json", diverged.dump());
  CHECK_THROWS_AS(cmd_al(replay, log, (tmp.path / "diverged.json").string()), DataError);
}

TEST_CASE("report tables and charts") {
  TempDir tmp;
  QuietLog log;
  RunConfig cfg = tiny_run(tmp.path);
  std::vector<std::string> manifests;
  for (const char* s : {"rs", "lc"}) {
    RunConfig run = cfg;
    run.set("al.strategy", s);
    run.out_dir = (tmp.path / s).string();
    cmd_al(run, log, std::nullopt);
    manifests.push_back((fs::path(run.out_dir) / "manifest.json").string());
  }
  RunConfig rep = cfg;
  rep.out_dir = (tmp.path / "report").string();
  cmd_report(rep, log, manifests);
  const auto rates = slurp(tmp.path / "report" / "annotation_rates.csv");
  CHECK(rates.rfind("features,rs_sar,rs_tar,rs_car,lc_sar,lc_tar,lc_car\nABC,", 0) == 0);
  CHECK(slurp(tmp.path / "report" / "metrics.csv").rfind("system,dataset,split,precision,recall,f1\n", 0) == 0);
  CHECK(slurp(tmp.path / "report" / "supervised.csv").rfind("features,precision,recall,f1\nABC,", 0) == 0);
  for (const char* svg : {"car_vs_f1.svg", "learning_curves.svg"}) {
    const auto body = slurp(tmp.path / "report" / svg);
    CHECK(body.rfind("<svg", 0) == 0);
    CHECK(body.find("</svg>") != std::string::npos);
  }

  auto other = nlohmann::json::parse(slurp(manifests[0]));
  other["hashes"]["test"] = "ffffffffffffffff";
  spit(tmp.path / "other.json", other.dump());
  manifests.push_back((tmp.path / "other.json").string());
  CHECK_THROWS_AS(cmd_report(rep, log, manifests), DataError);
  CHECK_THROWS_AS(cmd_report(rep, log, {}), ConfigError);
}

TEST_CASE("ttest output") {
  TempDir tmp;
  QuietLog log;
  RunConfig cfg = tiny_run(tmp.path);
  cfg.ttest_letters_b = "ABC";
  cmd_ttest(cfg, log);
  // identical systems: every fold difference is zero
  CHECK(slurp(fs::path(cfg.out_dir) / "ttest.csv") == "system_a,system_b,t,significant\nABC,ABC,0,false\n");
}
