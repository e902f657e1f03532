#pragma once

// Subcommand implementations behind the alwb executable. Each writes its
// outputs under config.out_dir and throws ConfigError or DataError.

#include <optional>
#include <string>
#include <vector>

#include "alwb/app/config.hpp"
#include "alwb/app/pipeline.hpp"

namespace alwb::app {

void cmd_synth(const RunConfig& config, RunLog& log);
void cmd_train_embeddings(const RunConfig& config, RunLog& log);
void cmd_build_codebooks(const RunConfig& config, RunLog& log);
void cmd_supervised(const RunConfig& config, RunLog& log);

/// Runs the loop, or replays a stored manifest and fails with DataError when
/// the inputs or the resulting history differ from the recorded ones.
void cmd_al(const RunConfig& config, RunLog& log, const std::optional<std::string>& replay_manifest);

/// Aggregates AL and supervised manifests into tables and charts.
void cmd_report(const RunConfig& config, RunLog& log, const std::vector<std::string>& manifests);

void cmd_ttest(const RunConfig& config, RunLog& log);

struct ALOutcome {
  ALState state;
  AnnotationRates rates;
  std::optional<PRF> supervised;  ///< set when the target came from a supervised run
  std::string history_csv;
  double seconds = 0.0;
};

/// One active learning run with the configured strategy and feature groups.
ALOutcome run_active_learning(Workbench& bench);

/// Configuration stored in a manifest's "config" object, applied on top of
/// the defaults.
RunConfig config_from_manifest(const std::string& manifest_path);

}  // namespace alwb::app
