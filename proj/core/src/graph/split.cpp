#include "tgsl/graph/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tgsl/error.hpp"

namespace tgsl::graph {
namespace {

double max_timestamp(const EventStore& store, EventRange range) {
  double t = 0.0;
  for (EventId id = range.begin; id < range.end; ++id)
    t = std::max(t, store.event(id).timestamp);
  return t;
}

}  // namespace

SplitSpec chronological_split(const EventStore& store,
                              std::array<double, 3> ratios, double mask_frac,
                              std::uint64_t seed) {
  const EventId n = store.num_events();
  if (n == 0) throw DataError("chronological split: empty event store");
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("chronological split: negative ratio");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ConfigError("chronological split: ratios must sum to 1");
  }
  if (!(mask_frac >= 0.0 && mask_frac < 1.0)) {
    throw ConfigError("chronological split: mask fraction must be in [0, 1)");
  }

  // The epsilon absorbs products such as 0.7 * 30 = 20.999999999999996.
  const auto n_train = static_cast<EventId>(std::floor(ratios[0] * n + 1e-9));
  const auto n_val = static_cast<EventId>(std::floor(ratios[1] * n + 1e-9));

  SplitSpec split;
  split.train = {0, n_train};
  split.val = {n_train, n_train + n_val};
  split.test = {n_train + n_val, n};
  split.t_max_train = max_timestamp(store, split.train);

  const auto nodes = static_cast<std::size_t>(store.num_nodes());
  std::vector<std::uint8_t> in_train(nodes, 0), in_eval(nodes, 0);
  for (EventId id = split.train.begin; id < split.train.end; ++id) {
    in_train[store.event(id).src] = in_train[store.event(id).dst] = 1;
  }
  for (EventId id = split.val.begin; id < n; ++id) {
    in_eval[store.event(id).src] = in_eval[store.event(id).dst] = 1;
  }

  split.masked.assign(nodes, 0);
  std::vector<NodeId> seen_eval_nodes;
  std::size_t eval_nodes = 0;
  for (std::size_t v = 0; v < nodes; ++v) {
    if (!in_eval[v]) continue;
    ++eval_nodes;
    if (!in_train[v]) {
      split.masked[v] = 1;
    } else {
      seen_eval_nodes.push_back(static_cast<NodeId>(v));
    }
  }

  const auto sample = std::min(
      seen_eval_nodes.size(),
      static_cast<std::size_t>(std::llround(mask_frac * static_cast<double>(eval_nodes))));
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates over the candidates.
  for (std::size_t i = 0; i < sample; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, seen_eval_nodes.size() - 1);
    std::swap(seen_eval_nodes[i], seen_eval_nodes[pick(rng)]);
    split.masked[seen_eval_nodes[i]] = 1;
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    if (split.masked[v]) split.inductive_masked_nodes.push_back(static_cast<NodeId>(v));
  }
  return split;
}

std::vector<std::uint8_t> training_usable(const EventStore& store,
                                          const SplitSpec& split) {
  std::vector<std::uint8_t> usable(static_cast<std::size_t>(store.num_events()), 0);
  for (EventId id = split.train.begin; id < split.train.end; ++id) {
    const auto& e = store.event(id);
    usable[id] = !split.is_masked(e.src) && !split.is_masked(e.dst);
  }
  return usable;
}

std::vector<std::uint8_t> observed_in_training(const EventStore& store,
                                               const SplitSpec& split) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(store.num_nodes()), 0);
  for (EventId id = split.train.begin; id < split.train.end; ++id) {
    const auto& e = store.event(id);
    if (split.is_masked(e.src) || split.is_masked(e.dst)) continue;
    seen[e.src] = seen[e.dst] = 1;
  }
  return seen;
}

std::vector<EventId> evaluation_events(const EventStore& store,
                                       const SplitSpec& split, EventRange range,
                                       Setting setting) {
  std::vector<EventId> out;
  const auto seen = observed_in_training(store, split);
  for (EventId id = range.begin; id < range.end; ++id) {
    const auto& e = store.event(id);
    const bool keep =
        setting == Setting::kInductive
            ? (split.is_masked(e.src) || split.is_masked(e.dst))
            : (seen[e.src] && seen[e.dst]);
    if (keep) out.push_back(id);
  }
  return out;
}

SparsifiedData sparsify(const EventStore& store, const SplitSpec& split, int n) {
  if (n < 1) throw ConfigError("sparsify: N must be >= 1");
  std::vector<TemporalEvent> kept;
  std::vector<EventId> source;
  for (EventId id = 0; id < store.num_events(); ++id) {
    const bool in_train = split.train.contains(id);
    if (in_train && (id - split.train.begin) % n != 0) continue;
    TemporalEvent e = store.event(id);
    e.edge_feature_id = static_cast<EventId>(kept.size());
    kept.push_back(e);
    source.push_back(id);
  }
  ad::Matrix features(static_cast<ad::Index>(kept.size()), store.edge_dim());
  for (std::size_t i = 0; i < source.size(); ++i)
    features.row(static_cast<ad::Index>(i)) = store.edge_features().row(source[i]);

  const EventId n_train = (split.train.size() + n - 1) / n;
  SparsifiedData out{
      EventStore(std::move(kept), store.node_features(), std::move(features),
                 store.num_users()),
      split};
  out.split.train = {0, n_train};
  out.split.val = {n_train, n_train + split.val.size()};
  out.split.test = {out.split.val.end, out.split.val.end + split.test.size()};
  out.split.t_max_train = max_timestamp(out.store, out.split.train);
  return out;
}

}  // namespace tgsl::graph
