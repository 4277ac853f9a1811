#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/graph/event_store.hpp"

namespace tgsl::graph {

struct NeighborEntry {
  NodeId neighbor = 0;
  // Event whose features this entry carries; kNoEvent for a zero feature.
  EventId event = kNoEvent;
  double timestamp = 0.0;
  // Index into an augmented view's added edges, or -1 for an original event.
  std::int32_t added = -1;

  friend bool operator==(const NeighborEntry&, const NeighborEntry&) = default;
};

// Read-only source of temporal neighborhoods.
class TemporalNeighbors {
 public:
  virtual ~TemporalNeighbors() = default;
  virtual NodeId num_nodes() const = 0;
  // The `n` most recent entries of `node` with timestamp strictly < t, in
  // increasing time order, appended to `out`.
  virtual void recent_before(NodeId node, double t, std::size_t n,
                             std::vector<NeighborEntry>& out) const = 0;
  // Every entry of `node` strictly before t, in increasing time order.
  virtual void all_before(NodeId node, double t,
                          std::vector<NeighborEntry>& out) const = 0;
};

// Per-node time-sorted adjacency. Undirected: event (u, v, t) is listed
// under both u and v (once for a self-loop). Immutable after build.
class NeighborIndex final : public TemporalNeighbors {
 public:
  NeighborIndex() = default;
  // `usable`, when non-empty, has one flag per event; unflagged events are
  // left out of the index.
  static NeighborIndex build(const EventStore& store,
                             std::span<const std::uint8_t> usable = {});

  NodeId num_nodes() const override {
    return static_cast<NodeId>(lists_.size());
  }
  std::span<const NeighborEntry> all(NodeId node) const { return lists_[node]; }
  // Every entry of `node` strictly before t.
  std::span<const NeighborEntry> history_before(NodeId node, double t) const;
  // The n most recent entries strictly before t.
  std::span<const NeighborEntry> neighbors_before(NodeId node, double t,
                                                  std::size_t n) const;
  void recent_before(NodeId node, double t, std::size_t n,
                     std::vector<NeighborEntry>& out) const override;
  void all_before(NodeId node, double t,
                  std::vector<NeighborEntry>& out) const override;


 private:
  std::vector<std::vector<NeighborEntry>> lists_;
};

}  // namespace tgsl::graph
