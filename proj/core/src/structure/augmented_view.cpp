#include "tgsl/structure/augmented_view.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "tgsl/autodiff/ops.hpp"
#include "tgsl/error.hpp"

namespace tgsl::structure {

using ad::Index;

namespace {

bool earlier(const graph::NeighborEntry& a, const graph::NeighborEntry& b) {
  return a.timestamp < b.timestamp;
}

// Strictly-before prefix of a time-sorted list.
std::size_t count_before(const std::vector<graph::NeighborEntry>& list,
                         double t) {
  auto it = std::lower_bound(
      list.begin(), list.end(), t,
      [](const graph::NeighborEntry& e, double v) { return e.timestamp < v; });
  return static_cast<std::size_t>(it - list.begin());
}

}  // namespace

AugmentedView::AugmentedView(const graph::TemporalNeighbors& base,
                             std::vector<CandidateEdge> added,
                             ad::Tensor weights)
    : base_(&base), added_(std::move(added)), weights_(std::move(weights)) {
  if (!weights_.defined() || weights_.cols() != 1 ||
      weights_.rows() != static_cast<Index>(added_.size())) {
    throw ShapeError("augmented view: weights must be [" +
                     std::to_string(added_.size()) + " x 1]");
  }
  lists_.resize(static_cast<std::size_t>(base.num_nodes()));
  for (std::size_t i = 0; i < added_.size(); ++i) {
    const auto& c = added_[i];
    if (c.src < 0 || c.src >= base.num_nodes() || c.dst < 0 ||
        c.dst >= base.num_nodes()) {
      throw std::out_of_range("augmented view: edge " + std::to_string(i) +
                              " has an endpoint out of range");
    }
    const auto tag = static_cast<std::int32_t>(i);
    lists_[c.src].push_back({c.dst, c.feature_event, c.t_new, tag});
    if (c.dst != c.src)
      lists_[c.dst].push_back({c.src, c.feature_event, c.t_new, tag});
  }
  for (auto& list : lists_) std::stable_sort(list.begin(), list.end(), earlier);
}

void AugmentedView::recent_before(graph::NodeId node, double t, std::size_t n,
                                  std::vector<graph::NeighborEntry>& out) const {
  const auto& extra = lists_.at(static_cast<std::size_t>(node));
  const std::size_t extra_count = count_before(extra, t);
  if (extra_count == 0) {
    base_->recent_before(node, t, n, out);
    return;
  }
  std::vector<graph::NeighborEntry> base_part;
  base_->recent_before(node, t, n, base_part);
  const std::size_t from = extra_count > n ? extra_count - n : 0;
  std::vector<graph::NeighborEntry> merged;
  merged.reserve(base_part.size() + extra_count - from);
  std::merge(base_part.begin(), base_part.end(), extra.begin() + from,
             extra.begin() + extra_count, std::back_inserter(merged), earlier);
  const std::size_t skip = merged.size() > n ? merged.size() - n : 0;
  out.insert(out.end(), merged.begin() + skip, merged.end());
}

void AugmentedView::all_before(graph::NodeId node, double t,
                               std::vector<graph::NeighborEntry>& out) const {
  const auto& extra = lists_.at(static_cast<std::size_t>(node));
  std::vector<graph::NeighborEntry> base_part;
  base_->all_before(node, t, base_part);
  std::merge(base_part.begin(), base_part.end(), extra.begin(),
             extra.begin() + count_before(extra, t), std::back_inserter(out),
             earlier);
}

AugmentedView build_augmented_view(const graph::TemporalNeighbors& base,
                                   const CandidateSet& candidates,
                                   const Selection& selection) {
  const auto& rho = selection.rho;
  std::map<std::tuple<graph::NodeId, graph::NodeId, double>, std::size_t> best;
  std::vector<std::size_t> kept;
  for (auto i : selection.selected) {
    if (i >= candidates.edges.size()) {
      throw std::out_of_range("augmented view: selected index " +
                              std::to_string(i) + " out of range");
    }
    const auto& c = candidates.edges[i];
    auto [it, fresh] = best.try_emplace({c.src, c.dst, c.t_new}, kept.size());
    if (fresh) {
      kept.push_back(i);
    } else if (rho.value()(static_cast<Index>(i), 0) >
               rho.value()(static_cast<Index>(kept[it->second]), 0)) {
      kept[it->second] = i;
    }
  }
  std::vector<CandidateEdge> added;
  std::vector<Index> rows;
  for (auto i : kept) {
    added.push_back(candidates.edges[i]);
    rows.push_back(static_cast<Index>(i));
  }
  ad::Tensor weights = rho.defined()
                           ? ad::gather_rows(rho, rows)
                           : ad::Tensor::zeros(0, 1);
  return AugmentedView(base, std::move(added), std::move(weights));
}

}  // namespace tgsl::structure
