#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/encoder/time_encoding.hpp"
#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/neighbor_index.hpp"

namespace tgsl::encoder {

// Where an edge weight rho enters attention.
enum class WeightInjection {
  kValue,  // value vectors scaled by rho
  kLogit,  // log(rho) added to the attention logit
};

struct EncoderConfig {
  ad::Index node_dim = 0;
  ad::Index edge_dim = 0;
  ad::Index time_dim = 100;
  ad::Index hidden_dim = 100;
  int heads = 2;
  int layers = 2;
  std::size_t neighbors = 20;
  // Most recent neighbors by default; seeded uniform draw when set.
  bool uniform_neighbors = false;
  std::uint64_t neighbor_seed = 0;
  WeightInjection injection = WeightInjection::kValue;
};

struct AttentionLayerParams {
  ad::Tensor w_query;
  ad::Tensor w_key;
  ad::Tensor w_value;
  ad::Tensor merge_w1;
  ad::Tensor merge_b1;
  ad::Tensor merge_w2;
  ad::Tensor merge_b2;
};

struct LinkHeadParams {
  ad::Tensor w1;
  ad::Tensor b1;
  ad::Tensor w2;
  ad::Tensor b2;
};

// Parameters of the temporal attention encoder and its link scoring head.
struct EncoderParams {
  EncoderConfig config;
  std::vector<AttentionLayerParams> layers;
  LinkHeadParams head;

  static EncoderParams init(const EncoderConfig& config, std::uint64_t seed);
  // Flat list in a fixed order (layers first, then the head).
  std::vector<ad::Tensor> parameters() const;
  // Deep copy with independent storage.
  EncoderParams clone() const;
};

// Everything an encoding pass reads besides the parameters.
struct EncodeInputs {
  const graph::EventStore* store = nullptr;
  const graph::TemporalNeighbors* neighbors = nullptr;
  // Neighbor lookups use min(t, cutoff).
  double cutoff = std::numeric_limits<double>::infinity();
  // Optional [num_events x 1] weights for original events.
  const ad::Tensor* event_weights = nullptr;
  // Optional [num_added x 1] weights for augmented edges, indexed by
  // NeighborEntry::added.
  const ad::Tensor* added_weights = nullptr;
};

struct EncodeQuery {
  graph::NodeId node = 0;
  double time = 0.0;
};

// Batch of node embeddings; row i belongs to (nodes[i], times[i]).
struct NodeEmbeddings {
  ad::Tensor values;
  std::vector<graph::NodeId> nodes;
  std::vector<double> times;
};

// Attention probabilities of the top layer, one [B x n] grid per head, plus
// the mask of real (non-padding) slots.
struct AttentionTrace {
  std::vector<ad::Matrix> probabilities;
  std::vector<std::uint8_t> mask;
};

// Temporal graph attention encoder with a fixed cosine time encoding.
// Layer l attends from (h_{l-1}(v) || TE(0)) over the node's most recent
// neighbors (h_{l-1}(u) || e_uv || TE(t - t_uv)) and merges the attention
// output with h_{l-1}(v) through a two-layer feed-forward block. Layer 0 is
// the raw node feature.
class TgatEncoder {
 public:
  explicit TgatEncoder(const EncoderParams& params);

  const TimeEncoding& time_encoding() const { return time_encoding_; }

  NodeEmbeddings encode(std::span<const EncodeQuery> queries,
                        const EncodeInputs& inputs,
                        AttentionTrace* trace = nullptr) const;

 private:
  // `slot_weights` is [num_events + num_added x 1] or undefined.
  ad::Tensor encode_layer(std::span<const EncodeQuery> queries, int layer,
                          const EncodeInputs& inputs,
                          const ad::Tensor& slot_weights,
                          AttentionTrace* trace) const;
  void select_neighbors(const EncodeQuery& q, const EncodeInputs& inputs,
                        std::vector<graph::NeighborEntry>& out) const;

  const EncoderParams& params_;
  TimeEncoding time_encoding_;
};

// Link probability sigmoid(head([u || v])) per row. Throws ConfigError when
// the row reference times differ.
ad::Tensor link_score(const NodeEmbeddings& u, const NodeEmbeddings& v,
                      const EncoderParams& params);

}  // namespace tgsl::encoder
