#include "tgsl/encoder/tgat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "tgsl/autodiff/init.hpp"
#include "tgsl/autodiff/ops.hpp"
#include "tgsl/error.hpp"

namespace tgsl::encoder {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

namespace {

void validate(const EncoderConfig& c) {
  if (c.node_dim < 0 || c.edge_dim < 0) {
    throw ConfigError("encoder: feature dimensions must be >= 0");
  }
  if (c.time_dim < 1 || c.hidden_dim < 1) {
    throw ConfigError("encoder: time_dim and hidden_dim must be >= 1");
  }
  if (c.heads < 1 || c.hidden_dim % c.heads != 0) {
    throw ConfigError("encoder: hidden_dim " + std::to_string(c.hidden_dim) +
                      " is not divisible by heads " + std::to_string(c.heads));
  }
  if (c.layers < 1) throw ConfigError("encoder: layers must be >= 1");
  if (c.neighbors < 1) throw ConfigError("encoder: n_nb must be >= 1");
}

Index layer_input_dim(const EncoderConfig& c, int layer) {
  return layer == 0 ? c.node_dim : c.hidden_dim;
}

Tensor clone_param(const Tensor& t) { return t.defined() ? t.clone() : t; }

// Deterministic per-(node, time) stream for uniform neighbor draws.
std::uint64_t mix_seed(std::uint64_t seed, graph::NodeId node, double t) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &t, sizeof(bits));
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(node),
                    static_cast<std::uint32_t>(node >> 32),
                    static_cast<std::uint32_t>(bits),
                    static_cast<std::uint32_t>(bits >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

EncoderParams EncoderParams::init(const EncoderConfig& config,
                                  std::uint64_t seed) {
  validate(config);
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.config = config;
  const Index h = config.hidden_dim;
  for (int l = 0; l < config.layers; ++l) {
    const Index d_in = layer_input_dim(config, l);
    const Index q_in = d_in + config.time_dim;
    const Index k_in = d_in + config.edge_dim + config.time_dim;
    const std::string prefix = "layer" + std::to_string(l) + ".";
    AttentionLayerParams a;
    a.w_query = ad::uniform_parameter(q_in, h, q_in, rng, prefix + "w_query");
    a.w_key = ad::uniform_parameter(k_in, h, k_in, rng, prefix + "w_key");
    a.w_value = ad::uniform_parameter(k_in, h, k_in, rng, prefix + "w_value");
    a.merge_w1 = ad::uniform_parameter(h + d_in, h, h + d_in, rng,
                                       prefix + "merge_w1");
    a.merge_b1 = ad::uniform_parameter(1, h, h + d_in, rng, prefix + "merge_b1");
    a.merge_w2 = ad::uniform_parameter(h, h, h, rng, prefix + "merge_w2");
    a.merge_b2 = ad::uniform_parameter(1, h, h, rng, prefix + "merge_b2");
    p.layers.push_back(std::move(a));
  }
  p.head.w1 = ad::uniform_parameter(2 * h, h, 2 * h, rng, "head.w1");
  p.head.b1 = ad::uniform_parameter(1, h, 2 * h, rng, "head.b1");
  p.head.w2 = ad::uniform_parameter(h, 1, h, rng, "head.w2");
  p.head.b2 = ad::uniform_parameter(1, 1, h, rng, "head.b2");
  return p;
}

std::vector<Tensor> EncoderParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& a : layers) {
    out.insert(out.end(), {a.w_query, a.w_key, a.w_value, a.merge_w1,
                           a.merge_b1, a.merge_w2, a.merge_b2});
  }
  out.insert(out.end(), {head.w1, head.b1, head.w2, head.b2});
  return out;
}

EncoderParams EncoderParams::clone() const {
  EncoderParams p;
  p.config = config;
  for (const auto& a : layers) {
    p.layers.push_back({clone_param(a.w_query), clone_param(a.w_key),
                        clone_param(a.w_value), clone_param(a.merge_w1),
                        clone_param(a.merge_b1), clone_param(a.merge_w2),
                        clone_param(a.merge_b2)});
  }
  p.head = {clone_param(head.w1), clone_param(head.b1), clone_param(head.w2),
            clone_param(head.b2)};
  return p;
}

TgatEncoder::TgatEncoder(const EncoderParams& params)
    : params_(params), time_encoding_(params.config.time_dim) {
  validate(params.config);
  if (static_cast<int>(params.layers.size()) != params.config.layers) {
    throw ConfigError("encoder: parameter set has " +
                      std::to_string(params.layers.size()) + " layers, config " +
                      std::to_string(params.config.layers));
  }
}

void TgatEncoder::select_neighbors(const EncodeQuery& q,
                                   const EncodeInputs& inputs,
                                   std::vector<graph::NeighborEntry>& out) const {
  const double t = std::min(q.time, inputs.cutoff);
  const auto& c = params_.config;
  if (!c.uniform_neighbors) {
    inputs.neighbors->recent_before(q.node, t, c.neighbors, out);
    return;
  }
  std::vector<graph::NeighborEntry> history;
  inputs.neighbors->all_before(q.node, t, history);
  if (history.empty()) return;
  std::mt19937_64 rng(mix_seed(c.neighbor_seed, q.node, t));
  std::uniform_int_distribution<std::size_t> pick(0, history.size() - 1);
  std::vector<std::size_t> chosen(c.neighbors);
  for (auto& i : chosen) i = pick(rng);
  std::sort(chosen.begin(), chosen.end());
  for (auto i : chosen) out.push_back(history[i]);
}

Tensor TgatEncoder::encode_layer(std::span<const EncodeQuery> queries,
                                 int layer, const EncodeInputs& inputs,
                                 const Tensor& slot_weights,
                                 AttentionTrace* trace) const {
  const auto& store = *inputs.store;
  const Index b = static_cast<Index>(queries.size());
  if (layer == 0) {
    std::vector<Index> rows(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) rows[i] = queries[i].node;
    return ad::gather_rows(Tensor::constant(store.node_features()), rows);
  }
  const auto& c = params_.config;
  const auto& p = params_.layers[static_cast<std::size_t>(layer - 1)];

  // Neighbor slots, padded to the widest row.
  std::vector<std::vector<graph::NeighborEntry>> lists(queries.size());
  std::size_t width = 1;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    select_neighbors(queries[i], inputs, lists[i]);
    width = std::max(width, lists[i].size());
  }
  const Index n = static_cast<Index>(width);

  // One recursive call covers the query nodes and every real neighbor.
  std::vector<EncodeQuery> below(queries.begin(), queries.end());
  std::vector<Index> nbr_rows(static_cast<std::size_t>(b * n), -1);
  std::vector<Index> edge_rows(static_cast<std::size_t>(b * n), -1);
  std::vector<Index> weight_rows(static_cast<std::size_t>(b * n), -1);
  std::vector<double> deltas(static_cast<std::size_t>(b * n), 0.0);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(b * n), 0);
  for (Index i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < lists[i].size(); ++j) {
      const auto& e = lists[i][j];
      const std::size_t slot = static_cast<std::size_t>(i * n) + j;
      nbr_rows[slot] = static_cast<Index>(below.size());
      below.push_back({e.neighbor, e.timestamp});
      edge_rows[slot] = e.event;
      weight_rows[slot] =
          e.added >= 0 ? store.num_events() + e.added : e.event;
      deltas[slot] = queries[i].time - e.timestamp;
      mask[slot] = 1;
    }
  }
  Tensor h_below = encode_layer(below, layer - 1, inputs, slot_weights, nullptr);
  Tensor h_self = ad::slice_rows(h_below, 0, b);
  Tensor h_nbr = ad::gather_rows(h_below, nbr_rows);

  Tensor edge = ad::gather_rows(Tensor::constant(store.edge_features()),
                                edge_rows);
  Matrix t_key_rows = time_encoding_.encode_rows(deltas);
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s]) t_key_rows.row(static_cast<Index>(s)).setZero();
  }
  Tensor t_key = Tensor::constant(std::move(t_key_rows));
  Tensor t_zero = Tensor::constant(
      time_encoding_.encode(0.0).replicate(b, 1));
  Tensor q_in = ad::concat_cols({h_self, t_zero});
  Tensor k_in = ad::concat_cols({h_nbr, edge, t_key});

  Tensor query = ad::matmul(q_in, p.w_query);
  Tensor key = ad::matmul(k_in, p.w_key);
  Tensor value = ad::matmul(k_in, p.w_value);

  Tensor weights;
  if (slot_weights.defined()) weights = ad::gather_rows(slot_weights, weight_rows);
  Tensor logit_bias;
  if (weights.defined()) {
    if (c.injection == WeightInjection::kValue) {
      value = ad::mul_col(value, weights);
    } else {
      logit_bias = ad::reshape(ad::log(ad::clamp(weights, 1e-12, 1.0)), b, n);
    }
  }

  const Index dh = c.hidden_dim / c.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  if (trace != nullptr) {
    trace->probabilities.clear();
    trace->mask = mask;
  }
  for (int k = 0; k < c.heads; ++k) {
    Tensor qh = ad::slice_cols(query, k * dh, dh);
    Tensor kh = ad::slice_cols(key, k * dh, dh);
    Tensor vh = ad::slice_cols(value, k * dh, dh);
    Tensor scores = ad::scale(ad::group_dot(qh, kh), inv_sqrt);
    if (logit_bias.defined()) scores = ad::add(scores, logit_bias);
    Tensor attn = ad::masked_softmax_rows(scores, mask);
    if (trace != nullptr) trace->probabilities.push_back(attn.value());
    heads.push_back(ad::group_weighted_sum(attn, vh));
  }
  Tensor context = ad::concat_cols(heads);
  Tensor hidden = ad::relu(ad::linear(ad::concat_cols({context, h_self}),
                                      p.merge_w1, p.merge_b1));
  return ad::linear(hidden, p.merge_w2, p.merge_b2);
}

NodeEmbeddings TgatEncoder::encode(std::span<const EncodeQuery> queries,
                                   const EncodeInputs& inputs,
                                   AttentionTrace* trace) const {
  if (inputs.store == nullptr || inputs.neighbors == nullptr) {
    throw std::invalid_argument("encoder: store and neighbors are required");
  }
  const auto& store = *inputs.store;
  const auto& c = params_.config;
  if (store.node_dim() != c.node_dim || store.edge_dim() != c.edge_dim) {
    throw ConfigError("encoder: configured feature dims (" +
                      std::to_string(c.node_dim) + ", " +
                      std::to_string(c.edge_dim) + ") differ from data (" +
                      std::to_string(store.node_dim()) + ", " +
                      std::to_string(store.edge_dim()) + ")");
  }
  if (queries.empty()) {
    throw std::invalid_argument("encoder: empty query batch");
  }
  for (const auto& q : queries) {
    if (q.node < 0 || q.node >= store.num_nodes()) {
      throw std::out_of_range("encoder: node " + std::to_string(q.node) +
                              " out of range");
    }
  }
  if (inputs.event_weights != nullptr &&
      (inputs.event_weights->rows() != store.num_events() ||
       inputs.event_weights->cols() != 1)) {
    throw ShapeError("encoder: event weights " +
                     inputs.event_weights->shape_string() + " for " +
                     std::to_string(store.num_events()) + " events");
  }
  if (inputs.added_weights != nullptr && inputs.added_weights->cols() != 1) {
    throw ShapeError("encoder: added weights must be a column, got " +
                     inputs.added_weights->shape_string());
  }

  Tensor slot_weights;
  if (inputs.event_weights != nullptr || inputs.added_weights != nullptr) {
    Tensor base = inputs.event_weights != nullptr
                      ? *inputs.event_weights
                      : Tensor::constant(Matrix::Ones(store.num_events(), 1));
    slot_weights = inputs.added_weights != nullptr
                       ? ad::concat_rows({base, *inputs.added_weights})
                       : base;
  }

  NodeEmbeddings out;
  out.values = encode_layer(queries, c.layers, inputs, slot_weights, trace);
  out.nodes.reserve(queries.size());
  out.times.reserve(queries.size());
  for (const auto& q : queries) {
    out.nodes.push_back(q.node);
    out.times.push_back(q.time);
  }
  return out;
}

Tensor link_score(const NodeEmbeddings& u, const NodeEmbeddings& v,
                  const EncoderParams& params) {
  if (u.values.rows() != v.values.rows() || u.times.size() != v.times.size()) {
    throw ShapeError("link_score: " + u.values.shape_string() + " vs " +
                     v.values.shape_string());
  }
  for (std::size_t i = 0; i < u.times.size(); ++i) {
    if (u.times[i] != v.times[i]) {
      throw ConfigError("link_score: row " + std::to_string(i) +
                        " pairs embeddings at different times");
    }
  }
  const auto& h = params.head;
  Tensor hidden =
      ad::relu(ad::linear(ad::concat_cols({u.values, v.values}), h.w1, h.b1));
  return ad::sigmoid(ad::linear(hidden, h.w2, h.b2));
}

}  // namespace tgsl::encoder
