#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/encoder/time_encoding.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/structure/augmented_view.hpp"
#include "tgsl/structure/candidates.hpp"
#include "tgsl/structure/context_predictor.hpp"
#include "tgsl/structure/etgnn.hpp"
#include "tgsl/structure/selection.hpp"

namespace tgsl::structure {

struct StructureConfig {
  CandidateConfig candidates;
  std::size_t k = 8;
  std::size_t n_rnn = 20;
  double tau = 1.0;
  int etgnn_layers = 2;
  std::size_t etgnn_fanout = 20;
};

// Learnable parts of the structure learner. ET-GNN states and the LSTM
// hidden state share the time-encoding dimension so that context and edge
// embeddings can be projected by s(delta).
struct StructureParams {
  EtgnnParams etgnn;
  LstmParams lstm;

  static StructureParams init(const StructureConfig& config,
                              ad::Index node_dim, ad::Index edge_dim,
                              ad::Index time_dim, std::uint64_t seed);
  std::vector<ad::Tensor> parameters() const;
  StructureParams clone() const;
};

// Read-only data the learner draws from. `visible` indexes the events the
// learner may see (subject to the per-call cutoff); `random_pool` holds the
// destinations of the random strategy.
struct StructureData {
  const graph::EventStore* store = nullptr;
  const graph::NeighborIndex* visible = nullptr;
  std::span<const graph::NodeId> random_pool;
  double t_max = 0.0;
};

struct Augmentation {
  CandidateSet candidates;
  // [sources x d]
  ad::Tensor contexts;
  // [candidates x 1]
  ad::Tensor logits;
  Selection selection;
  AugmentedView view;
};

// Samples candidates for `sources`, scores them from the context and edge
// embeddings computed over history before `cutoff`, selects the top k per
// source and returns them inserted over `base`.
Augmentation augment(std::span<const graph::NodeId> sources, double cutoff,
                     const graph::TemporalNeighbors& base,
                     const StructureData& data, const StructureParams& params,
                     const StructureConfig& config, SelectionMode mode,
                     std::uint64_t seed,
                     const encoder::TimeEncoding& time_encoding);

}  // namespace tgsl::structure
