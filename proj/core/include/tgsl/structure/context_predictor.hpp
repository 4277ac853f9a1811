#pragma once

#include <random>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/structure/etgnn.hpp"

namespace tgsl::structure {

// Single-layer LSTM. Gate blocks are laid out [input | forget | cell | output]
// along the columns of the weights.
struct LstmParams {
  ad::Tensor input_weight;   // [d_in x 4h]
  ad::Tensor hidden_weight;  // [h x 4h]
  ad::Tensor bias;           // [1 x 4h]

  static LstmParams init(ad::Index input_dim, ad::Index hidden_dim,
                         std::mt19937_64& rng);
  ad::Index hidden_dim() const { return hidden_weight.rows(); }
  std::vector<ad::Tensor> parameters() const;
  LstmParams clone() const;
};

// Final hidden state of the LSTM over each sequence. `steps[s]` holds, for
// every batch row, the row of `inputs` fed at step s or -1 for padding;
// padding steps leave the state untouched. Returns [B x h].
ad::Tensor lstm_final_state(const ad::Tensor& inputs,
                            const std::vector<std::vector<ad::Index>>& steps,
                            ad::Index batch, const LstmParams& params);

// The at most `n_rnn` most recent visible events of `node` before `cutoff`,
// oldest first.
std::vector<graph::EventId> context_events(const graph::TemporalNeighbors& visible,
                                           graph::NodeId node, double cutoff,
                                           std::size_t n_rnn);

// Context embedding per node: the LSTM's final hidden state over the edge
// embeddings of context_events(node). A node without history maps to zeros.
// Every context event must have a row in `edges`.
ad::Tensor context_predict(std::span<const graph::NodeId> nodes,
                           const graph::TemporalNeighbors& visible,
                           double cutoff, std::size_t n_rnn,
                           const EdgeEmbeddings& edges,
                           const LstmParams& params);

}  // namespace tgsl::structure
