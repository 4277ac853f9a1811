#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tgsl/graph/event_store.hpp"

namespace tgsl::graph {

struct EventRange {
  EventId begin = 0;
  EventId end = 0;
  EventId size() const { return end - begin; }
  bool contains(EventId id) const { return id >= begin && id < end; }
  friend bool operator==(const EventRange&, const EventRange&) = default;
};

enum class Setting { kTransductive, kInductive };

struct SplitSpec {
  EventRange train;
  EventRange val;
  EventRange test;
  double t_max_train = 0.0;
  // Sorted; nodes withheld from training for the inductive protocol.
  std::vector<NodeId> inductive_masked_nodes;
  // One flag per node, mirrors inductive_masked_nodes.
  std::vector<std::uint8_t> masked;

  bool is_masked(NodeId node) const { return masked[node] != 0; }
};

// Chronological split by event order. Train and validation sizes use floor,
// the remainder goes to test. The masked node set holds every node unseen in
// training plus a seeded round(mask_frac * |val/test nodes|) sample of the
// remaining val/test nodes.
SplitSpec chronological_split(const EventStore& store,
                              std::array<double, 3> ratios = {0.70, 0.15, 0.15},
                              double mask_frac = 0.1, std::uint64_t seed = 0);

// Per-event flag: a training event that touches no masked node.
std::vector<std::uint8_t> training_usable(const EventStore& store,
                                          const SplitSpec& split);

// Nodes that occur in at least one usable training event.
std::vector<std::uint8_t> observed_in_training(const EventStore& store,
                                               const SplitSpec& split);

// Evaluation events of `range` under a protocol: transductive keeps events
// whose endpoints were both observed in training, inductive keeps events
// touching at least one masked node.
std::vector<EventId> evaluation_events(const EventStore& store,
                                       const SplitSpec& split, EventRange range,
                                       Setting setting);

struct SparsifiedData {
  EventStore store;
  SplitSpec split;
};

// Keeps training events at train positions 0, N, 2N, ... and every
// validation and test event. The masked node set carries over; t_max_train
// is recomputed from the kept training events.
SparsifiedData sparsify(const EventStore& store, const SplitSpec& split, int n);

}  // namespace tgsl::graph
