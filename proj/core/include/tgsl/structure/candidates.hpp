#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgsl/graph/event_store.hpp"
#include "tgsl/graph/neighbor_index.hpp"

namespace tgsl::structure {

enum class Strategy { kOneHop, kThirdHop, kRandom };

std::string_view strategy_name(Strategy s);
// Accepts "one-hop", "third-hop" and "random".
std::optional<Strategy> parse_strategy(std::string_view name);

// Proposed interaction (src, dst, t_new).
struct CandidateEdge {
  graph::NodeId src = 0;
  graph::NodeId dst = 0;
  double t_new = 0.0;
  Strategy strategy = Strategy::kRandom;
  // Event whose embedding serves as the feature; kNoEvent means zeros.
  graph::EventId feature_event = graph::kNoEvent;
  // Timestamp the feature belongs to; equals t_new for a zero feature.
  double t_sample = 0.0;
  // Index of src in the source list given to sample_candidates.
  std::size_t source = 0;
};

struct CandidateSet {
  std::vector<CandidateEdge> edges;
  // Candidates of source i are edges[offsets[i], offsets[i + 1]).
  std::vector<std::size_t> offsets;
};

struct CandidateConfig {
  Strategy strategy = Strategy::kThirdHop;
  std::size_t per_source = 30;
  std::vector<int> hop_fanouts = {2, 4, 4};
};

// Up to `per_source` candidates per source from history strictly before
// `cutoff`. One-hop draws past entries of the source with replacement,
// third-hop takes khop_sample endpoints, random draws uniformly from
// `random_pool`. Every candidate gets t_new ~ U[0, t_max].
CandidateSet sample_candidates(std::span<const graph::NodeId> sources,
                               const CandidateConfig& config,
                               const graph::EventStore& store,
                               const graph::NeighborIndex& visible,
                               double cutoff,
                               std::span<const graph::NodeId> random_pool,
                               double t_max, std::uint64_t seed);

}  // namespace tgsl::structure
