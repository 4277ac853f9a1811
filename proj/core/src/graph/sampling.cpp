#include "tgsl/graph/sampling.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <unordered_set>

#include "tgsl/error.hpp"

namespace tgsl::graph {

std::vector<HopEndpoint> khop_sample(const NeighborIndex& index, NodeId node,
                                     double t, std::span<const int> fanouts,
                                     std::uint64_t seed) {
  if (fanouts.empty()) throw ConfigError("khop_sample: need at least one hop");
  for (int f : fanouts) {
    if (f < 1) throw ConfigError("khop_sample: fanouts must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::unordered_set<NodeId> earlier{node};
  std::vector<HopEndpoint> frontier{{node, kNoEvent}};
  std::vector<std::size_t> picks;

  for (std::size_t hop = 0; hop < fanouts.size(); ++hop) {
    std::vector<HopEndpoint> next;
    for (const auto& from : frontier) {
      auto hist = index.history_before(from.dst, t);
      const std::size_t take = std::min<std::size_t>(fanouts[hop], hist.size());
      picks.resize(hist.size());
      for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
      for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, picks.size() - 1);
        std::swap(picks[i], picks[pick(rng)]);
        const auto& entry = hist[picks[i]];
        next.push_back({entry.neighbor, entry.event});
      }
    }
    if (hop + 1 < fanouts.size()) {
      for (const auto& e : next) earlier.insert(e.dst);
    }
    frontier = std::move(next);
  }

  std::vector<HopEndpoint> out;
  std::unordered_set<NodeId> kept;
  for (const auto& e : frontier) {
    if (earlier.contains(e.dst) || kept.contains(e.dst)) continue;
    kept.insert(e.dst);
    out.push_back(e);
  }
  return out;
}

std::vector<NodeId> sample_negatives(std::span<const TemporalEvent> positives,
                                     std::span<const NodeId> pool,
                                     std::uint64_t seed) {
  if (pool.empty()) throw ConfigError("sample_negatives: empty node pool");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const bool single = std::all_of(pool.begin(), pool.end(),
                                  [&](NodeId v) { return v == pool[0]; });
  std::vector<NodeId> out;
  out.reserve(positives.size());
  for (const auto& pos : positives) {
    if (single && pool[0] == pos.dst) {
      throw ConfigError("sample_negatives: pool holds only the positive "
                        "destination " + std::to_string(pos.dst));
    }
    NodeId v;
    do {
      v = pool[pick(rng)];
    } while (v == pos.dst);
    out.push_back(v);
  }
  return out;
}

}  // namespace tgsl::graph
