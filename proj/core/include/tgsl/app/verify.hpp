#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tgsl/autodiff/grad_check.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/split.hpp"
#include "tgsl/training/trainer.hpp"

namespace tgsl::app {

enum class Relation { kAtMost, kAtLeast, kGreater, kEqual };

struct CheckResult {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  Relation relation = Relation::kAtMost;
  bool passed = false;
};

CheckResult make_check(std::string suite, std::string name, double measured,
                       Relation relation, double threshold);

// grad, gumbel, metrics, leakage.
const std::vector<std::string>& suite_names();

// Runs one suite, or every suite for "all". Throws ConfigError naming the
// valid suites for anything else.
std::vector<CheckResult> run_suite(std::string_view suite);

// One line per check: PASS/FAIL, suite/name, measured, relation, threshold.
std::string format_checks(const std::vector<CheckResult>& checks);

// Names of the differentiable primitives covered by check_primitive.
const std::vector<std::string>& primitive_names();

// Gradient check of one primitive on a seeded random instance, composed with
// a fixed random weighting so the scalar output touches every element.
ad::GradCheckReport check_primitive(std::string_view name, std::uint64_t seed);

// Seeded 6-node, 10-event bipartite graph with a full model (K = 2,
// four one-hop candidates per source) and a warm key queue. loss() is the
// complete training objective of one two-event batch and is deterministic.
struct ToyProblem {
  explicit ToyProblem(std::uint64_t seed);
  ToyProblem(const ToyProblem&) = delete;
  ToyProblem& operator=(const ToyProblem&) = delete;

  ad::Tensor loss() const;
  std::vector<ad::Tensor> parameters() const;

  std::uint64_t seed;
  graph::EventStore store;
  graph::SplitSpec split;
  training::TrainingData data;
  training::TrainConfig config;
  training::Model model;
  training::MoCoState moco;
  std::vector<graph::EventId> batch;
};

// Maximum absolute output change of the encoder, the edge-embedding network
// and the context predictor at query time t when events at or after t are
// perturbed, for one seeded random trial. Zero means bit-identical.
struct LeakageDelta {
  double encoder = 0.0;
  double etgnn_edges = 0.0;
  double etgnn_nodes = 0.0;
  double context = 0.0;
};
LeakageDelta leakage_trial(std::uint64_t seed);

}  // namespace tgsl::app
