#include "tgsl/structure/context_predictor.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tgsl/autodiff/init.hpp"
#include "tgsl/autodiff/ops.hpp"

namespace tgsl::structure {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

LstmParams LstmParams::init(Index input_dim, Index hidden_dim,
                            std::mt19937_64& rng) {
  LstmParams p;
  p.input_weight = ad::uniform_parameter(input_dim, 4 * hidden_dim, hidden_dim,
                                         rng, "lstm.input");
  p.hidden_weight = ad::uniform_parameter(hidden_dim, 4 * hidden_dim,
                                          hidden_dim, rng, "lstm.hidden");
  p.bias = ad::uniform_parameter(1, 4 * hidden_dim, hidden_dim, rng,
                                 "lstm.bias");
  return p;
}

std::vector<Tensor> LstmParams::parameters() const {
  return {input_weight, hidden_weight, bias};
}

LstmParams LstmParams::clone() const {
  return {input_weight.clone(), hidden_weight.clone(), bias.clone()};
}

Tensor lstm_final_state(const Tensor& inputs,
                        const std::vector<std::vector<Index>>& steps,
                        Index batch, const LstmParams& params) {
  const Index h = params.hidden_dim();
  Tensor hidden = Tensor::zeros(batch, h);
  Tensor cell = Tensor::zeros(batch, h);
  for (const auto& rows : steps) {
    if (static_cast<Index>(rows.size()) != batch) {
      throw std::invalid_argument("lstm: step has " +
                                  std::to_string(rows.size()) + " rows for " +
                                  std::to_string(batch));
    }
    Matrix keep(batch, 1), skip(batch, 1);
    for (Index i = 0; i < batch; ++i) {
      keep(i, 0) = rows[i] >= 0 ? 1.0 : 0.0;
      skip(i, 0) = 1.0 - keep(i, 0);
    }
    if (keep.sum() == 0.0) continue;
    Tensor x = ad::gather_rows(inputs, rows);
    Tensor gates = ad::add_row(
        ad::add(ad::matmul(x, params.input_weight),
                ad::matmul(hidden, params.hidden_weight)),
        params.bias);
    Tensor in_gate = ad::sigmoid(ad::slice_cols(gates, 0, h));
    Tensor forget_gate = ad::sigmoid(ad::slice_cols(gates, h, h));
    Tensor candidate = ad::tanh(ad::slice_cols(gates, 2 * h, h));
    Tensor out_gate = ad::sigmoid(ad::slice_cols(gates, 3 * h, h));
    Tensor next_cell =
        ad::add(ad::mul(forget_gate, cell), ad::mul(in_gate, candidate));
    Tensor next_hidden = ad::mul(out_gate, ad::tanh(next_cell));
    Tensor keep_t = Tensor::constant(keep), skip_t = Tensor::constant(skip);
    cell = ad::add(ad::mul_col(next_cell, keep_t), ad::mul_col(cell, skip_t));
    hidden =
        ad::add(ad::mul_col(next_hidden, keep_t), ad::mul_col(hidden, skip_t));
  }
  return hidden;
}

std::vector<graph::EventId> context_events(const graph::TemporalNeighbors& visible,
                                           graph::NodeId node, double cutoff,
                                           std::size_t n_rnn) {
  std::vector<graph::NeighborEntry> recent;
  visible.recent_before(node, cutoff, n_rnn, recent);
  std::vector<graph::EventId> out;
  out.reserve(recent.size());
  for (const auto& e : recent) out.push_back(e.event);
  return out;
}

Tensor context_predict(std::span<const graph::NodeId> nodes,
                       const graph::TemporalNeighbors& visible, double cutoff,
                       std::size_t n_rnn, const EdgeEmbeddings& edges,
                       const LstmParams& params) {
  const Index batch = static_cast<Index>(nodes.size());
  std::vector<std::vector<Index>> sequences(nodes.size());
  std::size_t longest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (auto e : context_events(visible, nodes[i], cutoff, n_rnn)) {
      const Index row = edges.row_of(e);
      if (row < 0) {
        throw std::invalid_argument("context: no embedding for event " +
                                    std::to_string(e));
      }
      sequences[i].push_back(row);
    }
    longest = std::max(longest, sequences[i].size());
  }
  // Left-padded so every sequence ends on the last step.
  std::vector<std::vector<Index>> steps(longest,
                                        std::vector<Index>(nodes.size(), -1));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t pad = longest - sequences[i].size();
    for (std::size_t s = 0; s < sequences[i].size(); ++s)
      steps[pad + s][i] = sequences[i][s];
  }
  return lstm_final_state(edges.values, steps, batch, params);
}

}  // namespace tgsl::structure
