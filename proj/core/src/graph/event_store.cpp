#include "tgsl/graph/event_store.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tgsl/error.hpp"

namespace tgsl::graph {

EventStore::EventStore(std::vector<TemporalEvent> events,
                       ad::Matrix node_features, ad::Matrix edge_features,
                       NodeId num_users)
    : node_features_(std::move(node_features)), num_users_(num_users) {
  const NodeId n = node_features_.rows();
  if (num_users_ < 0 || num_users_ > n) {
    throw DataError("event store: user count " + std::to_string(num_users_) +
                    " exceeds node count " + std::to_string(n));
  }
  if (!node_features_.allFinite()) {
    throw DataError("event store: non-finite node feature");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw DataError("event store: event " + std::to_string(i) +
                      " references a node outside [0, " + std::to_string(n) +
                      ")");
    }
    if (!std::isfinite(e.timestamp) || e.timestamp < 0) {
      throw DataError("event store: event " + std::to_string(i) +
                      " has an invalid timestamp");
    }
    if (e.edge_feature_id < 0 || e.edge_feature_id >= edge_features.rows()) {
      throw DataError("event store: event " + std::to_string(i) +
                      " has feature id " + std::to_string(e.edge_feature_id) +
                      " outside the feature table");
    }
    if (!edge_features.row(e.edge_feature_id).allFinite()) {
      throw DataError("event store: event " + std::to_string(i) +
                      " has a non-finite feature row");
    }
  }

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return events[a].timestamp < events[b].timestamp;
  });

  events_.reserve(events.size());
  edge_features_.resize(static_cast<ad::Index>(events.size()),
                        edge_features.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    TemporalEvent e = events[order[i]];
    edge_features_.row(static_cast<ad::Index>(i)) =
        edge_features.row(e.edge_feature_id);
    e.edge_feature_id = static_cast<EventId>(i);
    events_.push_back(e);
  }
}

EventId EventStore::lower_bound(double t) const {
  auto it = std::lower_bound(
      events_.begin(), events_.end(), t,
      [](const TemporalEvent& e, double value) { return e.timestamp < value; });
  return static_cast<EventId>(it - events_.begin());
}

namespace {
bool same_matrix(const ad::Matrix& a, const ad::Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || a == b);
}
}  // namespace

bool operator==(const EventStore& a, const EventStore& b) {
  return a.num_users_ == b.num_users_ && a.events_ == b.events_ &&
         same_matrix(a.node_features_, b.node_features_) &&
         same_matrix(a.edge_features_, b.edge_features_);
}

}  // namespace tgsl::graph
