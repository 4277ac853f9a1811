#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgsl/autodiff/adam.hpp"
#include "tgsl/encoder/tgat.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/graph/split.hpp"
#include "tgsl/structure/structure_learner.hpp"
#include "tgsl/training/moco.hpp"

namespace tgsl::training {

struct TrainConfig {
  std::size_t batch_size = 200;
  double lr = 1e-4;
  int max_epochs = 50;
  int patience = 3;
  double tolerance = 1e-3;
  double alpha = 0.5;
  double tau_cl = 0.2;
  double moco_momentum = 0.999;
  std::size_t queue_size = 512;
  // false trains the encoder alone on the original graph.
  bool use_tgsl = true;
};

// Query encoder plus structure learner.
struct Model {
  encoder::EncoderParams encoder;
  structure::StructureParams structure;
  structure::StructureConfig structure_config;

  static Model init(const encoder::EncoderConfig& encoder_config,
                    const structure::StructureConfig& structure_config,
                    std::uint64_t seed);
  // Encoder parameters, then structure parameters when `with_structure`.
  std::vector<ad::Tensor> parameters(bool with_structure = true) const;
  Model clone() const;
};

// Per-run indexes derived once from a store and its split.
struct TrainingData {
  const graph::EventStore* store = nullptr;
  const graph::SplitSpec* split = nullptr;
  std::vector<std::uint8_t> usable;
  // Usable training events only.
  graph::NeighborIndex train_index;
  // Every event of the store.
  graph::NeighborIndex full_index;
  // Destination nodes of usable training events, sorted.
  std::vector<graph::NodeId> train_destinations;
  // Destination nodes of all events, sorted.
  std::vector<graph::NodeId> all_destinations;
  // Nodes of usable training events, sorted.
  std::vector<graph::NodeId> train_nodes;

  static TrainingData prepare(const graph::EventStore& store,
                              const graph::SplitSpec& split);
  structure::StructureData structure_data() const;
};

struct BatchLosses {
  ad::Tensor total;
  ad::Tensor task_original;
  ad::Tensor task_augmented;
  ad::Tensor contrastive;
  // Normalized keys of the batch, to be enqueued after the step.
  ad::Matrix keys;
  std::size_t added_edges = 0;
};

// Loss of one training batch (positive events given by id, all usable and
// in time order). With use_tgsl the augmented-view task term and the
// contrastive term are included; otherwise only the original-graph term.
// Deterministic given the seed and the parameter values.
BatchLosses batch_loss(const TrainingData& data, const Model& model,
                       const MoCoState& moco, const TrainConfig& config,
                       std::span<const graph::EventId> batch,
                       std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double loss_task_ori = 0.0;
  double loss_task_aug = 0.0;
  double loss_cl = 0.0;
  double loss_total = 0.0;
  double val_ap = 0.0;
};

// One pass over the training range in chronological batches. Throws
// NumericError naming the batch when a loss turns non-finite.
EpochRecord train_epoch(const TrainingData& data, Model& model,
                        MoCoState& moco, ad::AdamState& adam,
                        const TrainConfig& config, std::uint64_t seed);

struct EvalOptions {
  graph::Setting setting = graph::Setting::kTransductive;
  // Inference on the augmented graph when the model was trained with the
  // structure learner; false also when the original graph is requested.
  bool augmented = true;
  std::size_t batch_size = 200;
};

struct MetricsReport {
  graph::Setting setting = graph::Setting::kTransductive;
  double acc = 0.0;
  double ap = 0.0;
  std::size_t positives = 0;
  int epochs = 0;
  std::vector<EpochRecord> history;
};

std::string_view setting_name(graph::Setting setting);
// Accepts "transductive" and "inductive".
std::optional<graph::Setting> parse_setting(std::string_view name);

// Scores every evaluation positive of `range` under the protocol against one
// seeded negative. The structure learner runs in noise-free mode. Throws
// DataError when the protocol leaves no event.
MetricsReport evaluate(const TrainingData& data, const Model& model,
                       graph::EventRange range, const EvalOptions& options,
                       std::uint64_t seed);

struct FitResult {
  Model best;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Trains with early stopping on validation AP (transductive) and returns the
// parameters of the best epoch. `on_epoch` observes each finished epoch.
FitResult fit(const TrainingData& data, const Model& initial,
              const TrainConfig& config, std::uint64_t seed,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace tgsl::training
