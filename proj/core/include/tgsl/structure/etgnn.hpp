#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/encoder/time_encoding.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/neighbor_index.hpp"

namespace tgsl::structure {

struct EtgnnLayerParams {
  // [d_h + (d_h + d_f + d_t)] x d
  ad::Tensor node_weight;
  // [d_f + 2 d_h + d_t] x d
  ad::Tensor edge_weight;
};

// Edge-centric time-aware message passing. Every layer outputs `dim`
// columns for both node and edge states; no bias terms.
struct EtgnnParams {
  std::vector<EtgnnLayerParams> layers;
  ad::Index dim = 0;

  static EtgnnParams init(int layers, ad::Index node_dim, ad::Index edge_dim,
                          ad::Index time_dim, ad::Index dim,
                          std::mt19937_64& rng);
  std::vector<ad::Tensor> parameters() const;
  EtgnnParams clone() const;
};

// Final-layer edge states, one row per requested event.
struct EdgeEmbeddings {
  ad::Tensor values;
  std::vector<graph::EventId> events;
  std::unordered_map<graph::EventId, ad::Index> rows;

  // Row of `event`, or -1 when absent.
  ad::Index row_of(graph::EventId event) const;
};

struct EtgnnOutput {
  EdgeEmbeddings edges;
  // Final-layer node states, row i for nodes[i].
  ad::Tensor nodes;
};

// Evaluates the final layer for `edges` and `nodes` over the events of
// `visible` strictly before `cutoff`. A node's message averages its at most
// `fanout` most recent visible entries (an empty neighborhood gives a zero
// message). Only the states the requested outputs depend on are computed.
// Throws std::invalid_argument when a requested edge is not before `cutoff`.
EtgnnOutput etgnn_forward(std::span<const graph::EventId> edges,
                          std::span<const graph::NodeId> nodes,
                          const graph::EventStore& store,
                          const graph::TemporalNeighbors& visible,
                          double cutoff, const EtgnnParams& params,
                          std::size_t fanout,
                          const encoder::TimeEncoding& time_encoding);

}  // namespace tgsl::structure
