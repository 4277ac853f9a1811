#include "tgsl/graph/synth.hpp"

#include <random>
#include <vector>

#include "tgsl/error.hpp"

namespace tgsl::graph {

EventStore synth_generate(const SynthConfig& config) {
  if (config.communities < 1 || config.users < 1 || config.items < 1 ||
      config.events < 1) {
    throw ConfigError("synth: counts must be positive");
  }
  if (config.items < config.communities) {
    throw ConfigError("synth: need at least one item per community");
  }
  if (!(config.noise >= 0.0 && config.noise <= 1.0) || config.jitter < 0.0) {
    throw ConfigError("synth: noise must be in [0, 1] and jitter >= 0");
  }
  const int c = config.communities;
  std::vector<std::vector<NodeId>> members(c);
  for (NodeId i = 0; i < config.items; ++i) members[i % c].push_back(i);

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<NodeId> pick_user(0, config.users - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> gap(1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<TemporalEvent> events;
  events.reserve(static_cast<std::size_t>(config.events));
  ad::Matrix features(config.events, c);
  double t = 0.0;
  for (EventId k = 0; k < config.events; ++k) {
    t += gap(rng);
    const NodeId user = pick_user(rng);
    const int home = static_cast<int>(user % c);
    int target = home;
    if (c > 1 && unit(rng) < config.noise) {
      std::uniform_int_distribution<int> other(0, c - 2);
      target = other(rng);
      if (target >= home) ++target;
    }
    const auto& pool = members[target];
    std::uniform_int_distribution<std::size_t> pick_item(0, pool.size() - 1);
    const NodeId item = pool[pick_item(rng)];
    for (int j = 0; j < c; ++j) {
      features(k, j) = (j == target ? 1.0 : 0.0) + config.jitter * jitter(rng);
    }
    events.push_back({user, config.users + item, t, k});
  }
  ad::Matrix node_features =
      ad::Matrix::Zero(config.users + config.items, config.node_dim);
  return EventStore(std::move(events), std::move(node_features),
                    std::move(features), config.users);
}

int synth_community(const EventStore& store, NodeId node, int communities) {
  const NodeId local = node < store.num_users() ? node : node - store.num_users();
  return static_cast<int>(local % communities);
}

}  // namespace tgsl::graph
