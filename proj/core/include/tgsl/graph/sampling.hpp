#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/graph/neighbor_index.hpp"

namespace tgsl::graph {

struct HopEndpoint {
  NodeId dst = 0;
  // Final-hop event whose embedding the endpoint borrows.
  EventId borrowed_event = kNoEvent;
  friend bool operator==(const HopEndpoint&, const HopEndpoint&) = default;
};

// Seeded walk-style expansion over history strictly before t: each frontier
// node draws up to fanouts[h] distinct entries for hop h. Endpoints equal to
// the source or to any node reached at an earlier hop are dropped, and each
// endpoint node is kept once (first occurrence).
std::vector<HopEndpoint> khop_sample(const NeighborIndex& index, NodeId node,
                                     double t, std::span<const int> fanouts,
                                     std::uint64_t seed);

// One uniform destination per positive, drawn from `pool` and different from
// the positive's own destination. Throws ConfigError when the pool is empty
// or offers no alternative for some positive.
std::vector<NodeId> sample_negatives(std::span<const TemporalEvent> positives,
                                     std::span<const NodeId> pool,
                                     std::uint64_t seed);

}  // namespace tgsl::graph
