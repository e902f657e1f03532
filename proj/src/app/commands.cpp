#include "alwb/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "alwb/app/plot.hpp"
#include "alwb/app/synth.hpp"
#include "alwb/errors.hpp"
#include "alwb/eval.hpp"
#include "alwb/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace alwb::app {

namespace {

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw DataError("cannot write " + path.string());
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}, {"tp", p.tp}, {"fp", p.fp}, {"fn", p.fn}};
}

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : cfg.entries()) out[k] = v;
  return out;
}

std::string fixed(double v, int d = 4) { return text::format_fixed(v, d); }

}  // namespace

RunConfig config_from_manifest(const std::string& manifest_path) {
  const auto m = read_json(manifest_path);
  if (!m.contains("config") || !m["config"].is_object()) throw DataError(manifest_path + ": no config object");
  RunConfig cfg;
  try {
    for (const auto& [k, v] : m["config"].items()) cfg.set(k, v.get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  return cfg;
}

void cmd_synth(const RunConfig& config, RunLog& log) {
  log.info("generating synthetic corpus");
  const auto corpus = generate_synthetic(config.synth);
  write_synthetic(corpus, config.out_dir);
  std::ofstream cfg(out_path(config, "synth.conf"));
  cfg << "paths.train = " << (fs::path(config.out_dir) / "train.conll").string() << '\n'
      << "paths.test = " << (fs::path(config.out_dir) / "test.conll").string() << '\n'
      << "paths.embed_corpus = " << (fs::path(config.out_dir) / "embed.txt").string() << '\n'
      << "paths.lexicon = " << (fs::path(config.out_dir) / "lexicon.tsv").string() << '\n';
  if (!cfg) throw DataError("cannot write synth.conf");
}

void cmd_train_embeddings(const RunConfig& config, RunLog& log) {
  Workbench bench(config, log);
  const auto& emb = bench.embeddings();
  std::ofstream out(out_path(config, "embeddings.txt"));
  write_embeddings(out, emb);
  if (!out) throw DataError("cannot write embeddings.txt");
}

void cmd_build_codebooks(const RunConfig& config, RunLog& log) {
  const auto letters = config.unsup_letters();
  if (letters.empty()) {
    log.info("no unsupervised feature groups enabled; nothing to build");
    return;
  }
  Workbench bench(config, log);
  for (const auto& [key, cb] : bench.codebooks(letters)) {
    const auto name = "codebook-" + std::string(to_string(key.first)) + "-" + std::to_string(key.second) + ".txt";
    std::ofstream out(out_path(config, name));
    write_codebook(out, cb);
    if (!out) throw DataError("cannot write " + name);
  }
}

void cmd_supervised(const RunConfig& config, RunLog& log) {
  Workbench bench(config, log);
  const auto t0 = std::chrono::steady_clock::now();
  const auto letters = config.features.letters;
  const auto result = bench.supervised(letters);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream out(out_path(config, "model.txt"));
    write_model(out, result.model);
    if (!out) throw DataError("cannot write model.txt");
  }
  json m;
  m["kind"] = "supervised";
  m["config"] = config_json(config);
  m["hashes"] = bench.hashes();
  m["test"] = prf_json(result.test);
  m["target_f1"] = result.test.f1;
  m["cache_hit"] = result.cache_hit;
  m["seconds"] = seconds;
  m["warnings"] = log.warnings;
  write_text(out_path(config, "manifest.json"), m.dump(2) + "\n");
  log.info("supervised " + letters + ": F1 " + fixed(result.test.f1));
}

ALOutcome run_active_learning(Workbench& bench) {
  const auto& cfg = bench.config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto letters = cfg.features.letters;
  ALData data;
  data.train = &bench.train();
  data.test = &bench.test();
  data.lexicon = bench.lexicon();
  if (cfg.al.strategy == Strategy::dki && data.lexicon == nullptr) {
    throw ConfigError("al.strategy dki needs paths.lexicon");
  }
  if (cfg.al.strategy == Strategy::idiv || cfg.al.strategy == Strategy::idd) {
    if (cfg.embed_corpus.empty()) throw ConfigError("al.strategy " + std::string(to_string(cfg.al.strategy)) +
                                                    " needs paths.embed_corpus");
    data.reps = &bench.train_reps();
  }
  ALOutcome out;
  double target = 0.0;
  if (cfg.target_f1) {
    target = *cfg.target_f1;
  } else {
    const auto sup = bench.supervised(letters);
    out.supervised = sup.test;
    target = sup.test.f1;
  }
  data.train_features = bench.featurize(*data.train, letters);
  data.test_features = bench.featurize(*data.test, letters);
  ALConfig al = cfg.al;
  al.crf = cfg.crf;
  const ActiveLearner learner(data, al);
  auto [state, rates] = learner.run_until(target);
  if (!rates.reached) bench.log().warn("target F1 " + fixed(target) + " not reached; pool exhausted");
  out.history_csv = history_csv(state.history, data.train->totals);
  out.state = std::move(state);
  out.rates = rates;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void cmd_al(const RunConfig& config, RunLog& log, const std::optional<std::string>& replay_manifest) {
  RunConfig cfg = config;
  json recorded;
  if (replay_manifest) {
    recorded = read_json(*replay_manifest);
    cfg = config_from_manifest(*replay_manifest);
    cfg.out_dir = config.out_dir;
    cfg.cache_dir = config.cache_dir;
    if (cfg.embed.threads > 1) log.warn("replaying a run with embed.threads > 1; embeddings may differ");
  }
  Workbench bench(cfg, log);
  if (replay_manifest) {
    // Input files must be the recorded ones before anything is recomputed.
    bench.train();
    bench.test();
    bench.lexicon();
    if (!cfg.embed_corpus.empty()) bench.embeddings_key();
    const json hashes = recorded.value("hashes", json::object());
    for (const auto& [k, v] : hashes.items()) {
      const bool is_input = k == "train" || k == "test" || k == "lexicon" || k.rfind("embed_corpus.", 0) == 0;
      if (!is_input) continue;
      const auto it = bench.hashes().find(k);
      if (it == bench.hashes().end() || it->second != v.get<std::string>()) {
        throw DataError("replay: input '" + k + "' differs from the recorded run");
      }
    }
  }
  const auto outcome = run_active_learning(bench);
  write_text(out_path(cfg, "history.csv"), outcome.history_csv);

  json m;
  m["kind"] = "al";
  m["config"] = config_json(cfg);
  m["hashes"] = bench.hashes();
  m["history_csv"] = outcome.history_csv;
  json rows = json::array();
  for (const auto& h : outcome.state.history) {
    rows.push_back({{"iteration", h.iteration},
                    {"seq_used", h.used.sequences},
                    {"tok_used", h.used.tokens},
                    {"concept_used", h.used.concepts},
                    {"test", prf_json(h.test)}});
  }
  m["history"] = rows;
  m["totals"] = {{"sequences", bench.train().totals.sequences},
                 {"tokens", bench.train().totals.tokens},
                 {"concepts", bench.train().totals.concepts}};
  m["rates"] = {{"sar", outcome.rates.sar},       {"tar", outcome.rates.tar},
                {"car", outcome.rates.car},       {"reached", outcome.rates.reached},
                {"target_f1", outcome.rates.target_f1}, {"iteration", outcome.rates.iteration}};
  m["supervised"] = outcome.supervised ? prf_json(*outcome.supervised) : json(nullptr);
  m["labeled_ids"] = outcome.state.labeled_ids;
  m["seconds"] = outcome.seconds;
  m["warnings"] = log.warnings;
  write_text(out_path(cfg, replay_manifest ? "replay_manifest.json" : "manifest.json"), m.dump(2) + "\n");
  log.info(std::string(to_string(cfg.al.strategy)) + " " + cfg.features.letters + ": SAR " + fixed(outcome.rates.sar) +
           " TAR " + fixed(outcome.rates.tar) + " CAR " + fixed(outcome.rates.car));

  if (replay_manifest) {
    if (recorded.value("history_csv", std::string()) != outcome.history_csv) {
      throw DataError("replay: history differs from " + *replay_manifest);
    }
    log.info("replay matches " + *replay_manifest);
  }
}

void cmd_report(const RunConfig& config, RunLog& log, const std::vector<std::string>& manifests) {
  if (manifests.empty()) throw ConfigError("report: no manifests given");
  struct Run {
    std::string path;
    json m;
    std::string letters;
    std::string strategy;
  };
  std::vector<Run> runs;
  std::optional<std::string> test_hash;
  for (const auto& p : manifests) {
    auto m = read_json(p);
    const auto kind = m.value("kind", std::string());
    if (kind != "al" && kind != "supervised") throw DataError(p + ": unknown manifest kind '" + kind + "'");
    const auto h = m.value("hashes", json::object()).value("test", std::string());
    if (test_hash && *test_hash != h) throw DataError("report: " + p + " was evaluated on a different test set");
    test_hash = h;
    const auto& c = m["config"];
    runs.push_back({p, m, c.value("features.letters", std::string()), kind == "al" ? c.value("al.strategy", std::string()) : ""});
  }

  // Rows in first-seen order, strategies in canonical order.
  std::vector<std::string> letter_rows;
  std::set<std::string> strategies_seen;
  for (const auto& r : runs) {
    if (std::find(letter_rows.begin(), letter_rows.end(), r.letters) == letter_rows.end()) letter_rows.push_back(r.letters);
    if (!r.strategy.empty()) strategies_seen.insert(r.strategy);
  }
  std::vector<std::string> strategies;
  for (auto s : {Strategy::rs, Strategy::lc, Strategy::idiv, Strategy::idd, Strategy::dki}) {
    if (strategies_seen.count(std::string(to_string(s)))) strategies.emplace_back(to_string(s));
  }

  std::ostringstream rates_csv;
  rates_csv << "features";
  for (const auto& s : strategies) rates_csv << ',' << s << "_sar," << s << "_tar," << s << "_car";
  rates_csv << '\n';
  std::vector<PlotSeries> scatter;
  std::map<std::string, double> supervised_f1;
  std::ostringstream sup_csv;
  sup_csv << "features,precision,recall,f1\n";
  for (const auto& letters : letter_rows) {
    for (const auto& r : runs) {
      if (r.letters != letters || supervised_f1.count(letters)) continue;
      const json* t = nullptr;
      if (r.m["kind"] == "supervised") t = &r.m["test"];
      else if (!r.m["supervised"].is_null()) t = &r.m["supervised"];
      if (t == nullptr) continue;
      supervised_f1[letters] = (*t)["f1"].get<double>();
      sup_csv << letters << ',' << fixed((*t)["precision"].get<double>()) << ',' << fixed((*t)["recall"].get<double>())
              << ',' << fixed((*t)["f1"].get<double>()) << '\n';
    }
  }
  for (const auto& s : strategies) scatter.push_back({s, {}, {}, false});
  for (const auto& letters : letter_rows) {
    rates_csv << letters;
    for (std::size_t si = 0; si < strategies.size(); ++si) {
      double sar = 0, tar = 0, car = 0;
      int n = 0;
      for (const auto& r : runs) {
        if (r.letters != letters || r.strategy != strategies[si]) continue;
        sar += r.m["rates"]["sar"].get<double>();
        tar += r.m["rates"]["tar"].get<double>();
        car += r.m["rates"]["car"].get<double>();
        ++n;
      }
      if (n == 0) {
        rates_csv << ",,,";
        continue;
      }
      rates_csv << ',' << fixed(sar / n, 2) << ',' << fixed(tar / n, 2) << ',' << fixed(car / n, 2);
      if (supervised_f1.count(letters)) {
        scatter[si].points.emplace_back(car / n, supervised_f1[letters]);
        scatter[si].point_labels.push_back(letters);
      }
    }
    rates_csv << '\n';
  }

  std::ostringstream metrics;
  metrics << "system,dataset,split,precision,recall,f1\n";
  std::vector<PlotSeries> curves;
  for (const auto& r : runs) {
    const auto dataset = fs::path(r.m["config"].value("paths.train", std::string())).stem().string();
    const auto& c = r.m["config"];
    if (r.strategy.empty()) {
      const auto& t = r.m["test"];
      metrics << "crf-" << r.letters << ',' << dataset << ",test," << fixed(t["precision"].get<double>()) << ','
              << fixed(t["recall"].get<double>()) << ',' << fixed(t["f1"].get<double>()) << '\n';
      continue;
    }
    const auto system = r.strategy + "-" + r.letters + "-seed" + c.value("al.seed", std::string());
    const auto& last = r.m["history"].back()["test"];
    metrics << system << ',' << dataset << ",test," << fixed(last["precision"].get<double>()) << ','
            << fixed(last["recall"].get<double>()) << ',' << fixed(last["f1"].get<double>()) << '\n';
    PlotSeries curve{system, {}, {}, true};
    const double total = r.m["totals"]["sequences"].get<double>();
    for (const auto& h : r.m["history"]) {
      curve.points.emplace_back(100.0 * h["seq_used"].get<double>() / total, h["test"]["f1"].get<double>());
    }
    curves.push_back(std::move(curve));
  }

  write_text(out_path(config, "annotation_rates.csv"), rates_csv.str());
  write_text(out_path(config, "supervised.csv"), sup_csv.str());
  write_text(out_path(config, "metrics.csv"), metrics.str());
  write_text(out_path(config, "car_vs_f1.svg"),
             render_svg({"Supervised F1 against concept annotation rate", "CAR (%)", "F1", 640, 420}, scatter));
  if (!curves.empty()) {
    write_text(out_path(config, "learning_curves.svg"),
               render_svg({"Learning curves", "sequences labeled (%)", "test F1", 720, 460}, curves));
  }
  log.info("report written to " + config.out_dir);
}

void cmd_ttest(const RunConfig& config, RunLog& log) {
  Workbench bench(config, log);
  const auto& train = bench.train();
  const auto splits = make_5x2_splits(train, config.ttest_seed);
  const std::string systems[2] = {config.features.letters, config.ttest_letters_b};
  FoldMatrix scores[2];
  for (int s = 0; s < 2; ++s) {
    const auto features = bench.featurize(train, systems[s]);
    auto subset = [&](const std::vector<int>& ids) {
      std::vector<LabeledSequence> out;
      for (int id : ids) {
        const auto& sent = train.sentences[static_cast<std::size_t>(id)];
        out.push_back({features[static_cast<std::size_t>(id)], sent.gold_labels(), id});
      }
      return out;
    };
    auto score = [&](const CrfModel& model, const std::vector<int>& ids) {
      SpanSets gold, pred;
      for (int id : ids) {
        gold.push_back(extract_concepts(train.sentences[static_cast<std::size_t>(id)]));
        pred.push_back(spans_from_labels(predict(model, features[static_cast<std::size_t>(id)])));
      }
      return phrase_prf(gold, pred).f1;
    };
    for (int i = 0; i < 5; ++i) {
      const auto& [a, b] = splits[static_cast<std::size_t>(i)];
      log.info("ttest " + systems[s] + " replication " + std::to_string(i + 1));
      scores[s](i, 0) = score(train_crf(subset(a), config.crf), b);
      scores[s](i, 1) = score(train_crf(subset(b), config.crf), a);
    }
  }
  const auto result = five_by_two_ttest(scores[0], scores[1]);
  std::ostringstream csv;
  csv << "system_a,system_b,t,significant\n"
      << systems[0] << ',' << systems[1] << ',' << text::format_double(result.t_statistic) << ','
      << (result.significant_at_05 ? "true" : "false") << '\n';
  write_text(out_path(config, "ttest.csv"), csv.str());

  json folds = json::array();
  for (int i = 0; i < 5; ++i) {
    folds.push_back({{"a", {scores[0](i, 0), scores[0](i, 1)}}, {"b", {scores[1](i, 0), scores[1](i, 1)}}});
  }
  json m;
  m["kind"] = "ttest";
  m["config"] = config_json(config);
  m["hashes"] = bench.hashes();
  m["system_a"] = systems[0];
  m["system_b"] = systems[1];
  m["t"] = std::isfinite(result.t_statistic) ? json(result.t_statistic) : json(text::format_double(result.t_statistic));
  m["significant"] = result.significant_at_05;
  m["folds"] = folds;
  m["warnings"] = log.warnings;
  write_text(out_path(config, "ttest.json"), m.dump(2) + "\n");
  log.info("t = " + text::format_double(result.t_statistic));
}

}  // namespace alwb::app
