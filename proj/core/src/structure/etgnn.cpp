#include "tgsl/structure/etgnn.hpp"

#include <string>

#include "tgsl/autodiff/init.hpp"
#include "tgsl/autodiff/ops.hpp"

namespace tgsl::structure {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

namespace {

// Insertion-ordered id set.
template <typename Id>
class OrderedSet {
 public:
  Index insert(Id id) {
    auto [it, fresh] = rows_.try_emplace(id, static_cast<Index>(ids_.size()));
    if (fresh) ids_.push_back(id);
    return it->second;
  }
  Index row(Id id) const { return rows_.at(id); }
  const std::vector<Id>& ids() const { return ids_; }
  Index size() const { return static_cast<Index>(ids_.size()); }

 private:
  std::vector<Id> ids_;
  std::unordered_map<Id, Index> rows_;
};

Tensor gather_table(const Matrix& table, const std::vector<std::int64_t>& ids) {
  std::vector<Index> rows(ids.begin(), ids.end());
  return ad::gather_rows(Tensor::constant(table), rows);
}

}  // namespace

EtgnnParams EtgnnParams::init(int layers, Index node_dim, Index edge_dim,
                              Index time_dim, Index dim, std::mt19937_64& rng) {
  EtgnnParams p;
  p.dim = dim;
  Index dh = node_dim, df = edge_dim;
  for (int l = 0; l < layers; ++l) {
    const Index node_in = dh + dh + df + time_dim;
    const Index edge_in = df + 2 * dh + time_dim;
    const std::string prefix = "etgnn" + std::to_string(l) + ".";
    p.layers.push_back(
        {ad::uniform_parameter(node_in, dim, node_in, rng, prefix + "node"),
         ad::uniform_parameter(edge_in, dim, edge_in, rng, prefix + "edge")});
    dh = df = dim;
  }
  return p;
}

std::vector<Tensor> EtgnnParams::parameters() const {
  std::vector<Tensor> out;
  for (const auto& l : layers) {
    out.push_back(l.node_weight);
    out.push_back(l.edge_weight);
  }
  return out;
}

EtgnnParams EtgnnParams::clone() const {
  EtgnnParams p;
  p.dim = dim;
  for (const auto& l : layers)
    p.layers.push_back({l.node_weight.clone(), l.edge_weight.clone()});
  return p;
}

Index EdgeEmbeddings::row_of(graph::EventId event) const {
  auto it = rows.find(event);
  return it == rows.end() ? -1 : it->second;
}

EtgnnOutput etgnn_forward(std::span<const graph::EventId> edges,
                          std::span<const graph::NodeId> nodes,
                          const graph::EventStore& store,
                          const graph::TemporalNeighbors& visible,
                          double cutoff, const EtgnnParams& params,
                          std::size_t fanout,
                          const encoder::TimeEncoding& time_encoding) {
  const int depth = static_cast<int>(params.layers.size());
  if (depth < 1) throw std::invalid_argument("etgnn: no layers");
  for (auto e : edges) {
    if (e < 0 || e >= store.num_events() ||
        !(store.event(e).timestamp < cutoff)) {
      throw std::invalid_argument("etgnn: edge " + std::to_string(e) +
                                  " is not visible before the cutoff");
    }
  }

  // Top-down: the states each level needs from the level below.
  std::vector<OrderedSet<graph::EventId>> edge_sets(depth + 1);
  std::vector<OrderedSet<graph::NodeId>> node_sets(depth + 1);
  for (auto e : edges) edge_sets[depth].insert(e);
  for (auto v : nodes) node_sets[depth].insert(v);
  std::unordered_map<graph::NodeId, std::vector<graph::NeighborEntry>> hoods;
  auto hood = [&](graph::NodeId v) -> const std::vector<graph::NeighborEntry>& {
    auto [it, fresh] = hoods.try_emplace(v);
    if (fresh) visible.recent_before(v, cutoff, fanout, it->second);
    return it->second;
  };
  for (int l = depth; l >= 1; --l) {
    auto& below_edges = edge_sets[l - 1];
    auto& below_nodes = node_sets[l - 1];
    for (auto e : edge_sets[l].ids()) {
      below_edges.insert(e);
      below_nodes.insert(store.event(e).src);
      below_nodes.insert(store.event(e).dst);
    }
    for (auto v : node_sets[l].ids()) {
      below_nodes.insert(v);
      for (const auto& n : hood(v)) {
        below_nodes.insert(n.neighbor);
        below_edges.insert(n.event);
      }
    }
  }

  // Bottom-up evaluation.
  Tensor h = gather_table(store.node_features(), node_sets[0].ids());
  Tensor f = gather_table(store.edge_features(), edge_sets[0].ids());
  const Index d = params.dim;
  for (int l = 1; l <= depth; ++l) {
    const auto& p = params.layers[static_cast<std::size_t>(l - 1)];
    const auto& lower_nodes = node_sets[l - 1];
    const auto& lower_edges = edge_sets[l - 1];

    Tensor h_next = Tensor::zeros(0, d);
    if (node_sets[l].size() > 0) {
      std::vector<Index> self_rows, nbr_rows, nbr_edge_rows, offsets{0};
      std::vector<double> nbr_times;
      for (auto v : node_sets[l].ids()) {
        self_rows.push_back(lower_nodes.row(v));
        for (const auto& n : hood(v)) {
          nbr_rows.push_back(lower_nodes.row(n.neighbor));
          nbr_edge_rows.push_back(lower_edges.row(n.event));
          nbr_times.push_back(n.timestamp);
        }
        offsets.push_back(static_cast<Index>(nbr_rows.size()));
      }
      Tensor messages = ad::concat_cols(
          {ad::gather_rows(h, nbr_rows), ad::gather_rows(f, nbr_edge_rows),
           Tensor::constant(time_encoding.encode_rows(nbr_times))});
      Tensor mean = ad::segment_mean(messages, offsets);
      h_next = ad::relu(ad::matmul(
          ad::concat_cols({ad::gather_rows(h, self_rows), mean}),
          p.node_weight));
    }

    Tensor f_next = Tensor::zeros(0, d);
    if (edge_sets[l].size() > 0) {
      std::vector<Index> edge_rows, src_rows, dst_rows;
      std::vector<double> times;
      for (auto e : edge_sets[l].ids()) {
        const auto& ev = store.event(e);
        edge_rows.push_back(lower_edges.row(e));
        src_rows.push_back(lower_nodes.row(ev.src));
        dst_rows.push_back(lower_nodes.row(ev.dst));
        times.push_back(ev.timestamp);
      }
      f_next = ad::relu(ad::matmul(
          ad::concat_cols({ad::gather_rows(f, edge_rows),
                           ad::gather_rows(h, src_rows),
                           ad::gather_rows(h, dst_rows),
                           Tensor::constant(time_encoding.encode_rows(times))}),
          p.edge_weight));
    }
    h = h_next;
    f = f_next;
  }

  EtgnnOutput out;
  out.edges.values = f;
  out.edges.events = edge_sets[depth].ids();
  for (std::size_t i = 0; i < out.edges.events.size(); ++i)
    out.edges.rows.emplace(out.edges.events[i], static_cast<Index>(i));
  std::vector<Index> node_rows;
  for (auto v : nodes) node_rows.push_back(node_sets[depth].row(v));
  out.nodes = ad::gather_rows(h, node_rows);
  return out;
}

}  // namespace tgsl::structure
