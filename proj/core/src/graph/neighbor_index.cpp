#include "tgsl/graph/neighbor_index.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tgsl/error.hpp"

namespace tgsl::graph {

NeighborIndex NeighborIndex::build(const EventStore& store,
                                   std::span<const std::uint8_t> usable) {
  if (!usable.empty() &&
      static_cast<EventId>(usable.size()) != store.num_events()) {
    throw std::invalid_argument("neighbor index: usable mask has " +
                                std::to_string(usable.size()) +
                                " flags for " +
                                std::to_string(store.num_events()) + " events");
  }
  NeighborIndex index;
  index.lists_.resize(static_cast<std::size_t>(store.num_nodes()));
  const auto events = store.events();
  for (EventId id = 0; id < store.num_events(); ++id) {
    if (!usable.empty() && !usable[id]) continue;
    const auto& e = events[id];
    index.lists_[e.src].push_back({e.dst, id, e.timestamp, -1});
    if (e.dst != e.src) index.lists_[e.dst].push_back({e.src, id, e.timestamp, -1});
  }
  return index;
}

std::span<const NeighborEntry> NeighborIndex::history_before(NodeId node,
                                                             double t) const {
  if (node < 0 || node >= num_nodes()) {
    throw std::out_of_range("neighbor index: node " + std::to_string(node) +
                            " out of range");
  }
  const auto& list = lists_[node];
  auto it = std::lower_bound(
      list.begin(), list.end(), t,
      [](const NeighborEntry& e, double value) { return e.timestamp < value; });
  return {list.data(), static_cast<std::size_t>(it - list.begin())};
}

std::span<const NeighborEntry> NeighborIndex::neighbors_before(
    NodeId node, double t, std::size_t n) const {
  auto hist = history_before(node, t);
  if (hist.size() > n) hist = hist.subspan(hist.size() - n);
  return hist;
}

void NeighborIndex::recent_before(NodeId node, double t, std::size_t n,
                                  std::vector<NeighborEntry>& out) const {
  auto recent = neighbors_before(node, t, n);
  out.insert(out.end(), recent.begin(), recent.end());
}

void NeighborIndex::all_before(NodeId node, double t,
                               std::vector<NeighborEntry>& out) const {
  auto hist = history_before(node, t);
  out.insert(out.end(), hist.begin(), hist.end());
}

}  // namespace tgsl::graph
