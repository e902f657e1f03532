// alwb: active learning workbench for clinical concept extraction.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "alwb/app/commands.hpp"
#include "alwb/errors.hpp"

namespace {

struct Common {
  std::vector<std::string> config_files;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_files, "config file (key = value lines); repeatable, later wins");
  sub->add_option("-s,--set", c.overrides, "override one key, e.g. --set al.strategy=lc; repeatable");
  sub->add_option("-o,--out-dir", c.out_dir, "output directory (overrides paths.out_dir)");
  sub->add_flag("-q,--quiet", c.quiet, "suppress progress messages");
}

alwb::app::RunConfig load(const Common& c) {
  alwb::app::RunConfig cfg;
  for (const auto& f : c.config_files) alwb::app::apply_config_file(cfg, f);
  for (const auto& o : c.overrides) alwb::app::apply_override(cfg, o);
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning workbench for clinical concept extraction"};
  app.require_subcommand(1);
  Common common;
  std::optional<std::string> replay;
  std::vector<std::string> manifests;

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus, embedding text and lexicon");
  auto* embed = app.add_subcommand("train-embeddings", "train (or fetch cached) skip-gram word vectors");
  auto* books = app.add_subcommand("build-codebooks", "cluster the vector spaces used by the enabled groups");
  auto* sup = app.add_subcommand("supervised", "train on the full train set and score the test set");
  auto* al = app.add_subcommand("al", "run active learning until the target F1");
  auto* report = app.add_subcommand("report", "tables and charts from run manifests");
  auto* ttest = app.add_subcommand("ttest", "5x2cv paired t-test between two feature sets");
  auto* keys = app.add_subcommand("keys", "list every configuration key with its default");
  for (auto* s : {synth, embed, books, sup, al, report, ttest}) add_common(s, common);
  al->add_option("--replay", replay, "rerun a manifest and require an identical history");
  report->add_option("manifests", manifests, "manifest.json files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (keys->parsed()) {
      for (const auto& k : alwb::app::documented_keys()) {
        std::cout << k.key << " = " << k.default_value << "  # " << k.description << '\n';
      }
      return 0;
    }
    const auto cfg = load(common);
    alwb::app::RunLog log;
    log.quiet = common.quiet;
    if (synth->parsed()) alwb::app::cmd_synth(cfg, log);
    if (embed->parsed()) alwb::app::cmd_train_embeddings(cfg, log);
    if (books->parsed()) alwb::app::cmd_build_codebooks(cfg, log);
    if (sup->parsed()) alwb::app::cmd_supervised(cfg, log);
    if (al->parsed()) alwb::app::cmd_al(cfg, log, replay);
    if (report->parsed()) alwb::app::cmd_report(cfg, log, manifests);
    if (ttest->parsed()) alwb::app::cmd_ttest(cfg, log);
  } catch (const alwb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const alwb::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
