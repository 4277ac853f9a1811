#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tgsl/app/config.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/split.hpp"
#include "tgsl/training/trainer.hpp"

namespace tgsl::app {

// Store and split after optional sparsification.
struct LoadedData {
  graph::EventStore store;
  graph::SplitSpec split;
  graph::EventId train_events_before_sparsify = 0;
};

LoadedData load_data(const RunConfig& config);

struct SeedOutcome {
  std::uint64_t seed = 0;
  training::FitResult fit;
  // Test reports on the inference graph of the run (augmented with the
  // structure learner, original otherwise). Missing when the protocol
  // leaves no test event.
  std::optional<training::MetricsReport> transductive;
  std::optional<training::MetricsReport> inductive;
  // Original-graph inference with the same parameters; only with the
  // structure learner.
  std::optional<training::MetricsReport> transductive_original;
  std::optional<training::MetricsReport> inductive_original;
  double wall_seconds = 0.0;
  // Cumulative seconds at the end of each epoch.
  std::vector<double> epoch_seconds;
};

// Trains and evaluates one seed in memory.
SeedOutcome run_seed(const RunConfig& config, const LoadedData& data,
                     std::uint64_t seed);

// Canonical report document; a pure function of its arguments.
std::string report_json(const training::MetricsReport& report, bool augmented);
// Deterministic metrics document of one seed (no wall-clock values).
std::string metrics_json(const RunConfig& config, const LoadedData& data,
                         const SeedOutcome& outcome);

// Output directory of a seed: <out>/seed_<seed>.
std::string seed_directory(const RunConfig& config, std::uint64_t seed);

// Trains every configured seed and writes, per seed, manifest.json,
// metrics.json, metrics.csv, params.json and report_*.json. Returns the
// manifest paths.
std::vector<std::string> cmd_train(const RunConfig& config, std::ostream& log);

// Runs cmd_train once per (strategy, K) pair, each into the disjoint
// directory <out>/<strategy>_K<k>. Returns every manifest path.
std::vector<std::string> cmd_sweep(const RunConfig& config,
                                   const std::vector<structure::Strategy>& strategies,
                                   const std::vector<std::size_t>& ks,
                                   std::ostream& log);

// Re-evaluates the test range of a finished run from its manifest and
// parameter snapshot; returns the report document.
std::string cmd_eval(const std::string& manifest_path, graph::Setting setting,
                     bool original_graph);

// Writes the configured synthetic store as jodie-csv.
void cmd_synth(const RunConfig& config, const std::string& path);

}  // namespace tgsl::app
