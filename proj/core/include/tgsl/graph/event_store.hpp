#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::graph {

using NodeId = std::int64_t;
using EventId = std::int64_t;
inline constexpr EventId kNoEvent = -1;

// One interaction (u, v, t, e).
struct TemporalEvent {
  NodeId src = 0;
  NodeId dst = 0;
  double timestamp = 0.0;
  EventId edge_feature_id = 0;

  friend bool operator==(const TemporalEvent&, const TemporalEvent&) = default;
};

// Chronologically ordered event container with node and edge feature tables.
//
// Construction stable-sorts by timestamp (ties keep ingestion order) and
// repacks the edge feature table so that event i owns feature row i. Two
// stores built from the same rows in any order therefore compare equal.
// Immutable after construction.
class EventStore {
 public:
  EventStore() = default;
  // Throws DataError on out-of-range node ids, bad timestamps, invalid
  // feature ids or non-finite feature rows. `num_users` > 0 marks a
  // bipartite store with users in [0, num_users) and items after.
  EventStore(std::vector<TemporalEvent> events, ad::Matrix node_features,
             ad::Matrix edge_features, NodeId num_users = 0);

  std::span<const TemporalEvent> events() const { return events_; }
  const TemporalEvent& event(EventId id) const { return events_[id]; }
  EventId num_events() const { return static_cast<EventId>(events_.size()); }
  NodeId num_nodes() const { return node_features_.rows(); }
  NodeId num_users() const { return num_users_; }
  bool bipartite() const { return num_users_ > 0; }

  const ad::Matrix& node_features() const { return node_features_; }
  const ad::Matrix& edge_features() const { return edge_features_; }
  ad::Index node_dim() const { return node_features_.cols(); }
  ad::Index edge_dim() const { return edge_features_.cols(); }

  // Position of the first event with timestamp >= t.
  EventId lower_bound(double t) const;

  friend bool operator==(const EventStore& a, const EventStore& b);

 private:
  std::vector<TemporalEvent> events_;
  ad::Matrix node_features_;
  ad::Matrix edge_features_;
  NodeId num_users_ = 0;
};

}  // namespace tgsl::graph
