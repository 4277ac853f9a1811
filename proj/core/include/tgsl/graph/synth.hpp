#pragma once

#include <cstdint>

#include "tgsl/graph/event_store.hpp"

namespace tgsl::graph {

struct SynthConfig {
  int communities = 2;
  NodeId users = 400;
  NodeId items = 400;
  EventId events = 20000;
  // Probability that an event crosses to an item of another community.
  double noise = 0.1;
  // Standard deviation of the Gaussian jitter added to each feature column.
  double jitter = 0.3;
  ad::Index node_dim = 0;
  std::uint64_t seed = 0;
};

// Bipartite community interaction stream. User u sits in community
// u % communities and item i in i % communities. Each event picks a uniform
// user and, with probability 1 - noise, a uniform item of the same community,
// otherwise a uniform item of a different community. Inter-event gaps are
// Exp(1). Edge features are the item community's one-hot plus jitter.
EventStore synth_generate(const SynthConfig& config);

// Community of a node of a store produced by synth_generate.
int synth_community(const EventStore& store, NodeId node, int communities);

}  // namespace tgsl::graph
