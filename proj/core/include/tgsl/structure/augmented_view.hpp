#pragma once

#include <vector>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/graph/neighbor_index.hpp"
#include "tgsl/structure/candidates.hpp"
#include "tgsl/structure/selection.hpp"

namespace tgsl::structure {

// A base neighborhood plus weighted added edges. Added edge i is listed
// under both endpoints at its t_new with NeighborEntry::added = i, carries
// its feature event, and has weight row i of weights(). Holds a reference to
// the base, which must outlive the view.
class AugmentedView final : public graph::TemporalNeighbors {
 public:
  // `weights` is [added.size() x 1].
  AugmentedView(const graph::TemporalNeighbors& base,
                std::vector<CandidateEdge> added, ad::Tensor weights);

  graph::NodeId num_nodes() const override { return base_->num_nodes(); }
  void recent_before(graph::NodeId node, double t, std::size_t n,
                     std::vector<graph::NeighborEntry>& out) const override;
  void all_before(graph::NodeId node, double t,
                  std::vector<graph::NeighborEntry>& out) const override;

  const std::vector<CandidateEdge>& added() const { return added_; }
  const ad::Tensor& weights() const { return weights_; }

 private:
  const graph::TemporalNeighbors* base_;
  std::vector<CandidateEdge> added_;
  ad::Tensor weights_;
  std::vector<std::vector<graph::NeighborEntry>> lists_;
};

// View over `base` holding the selected candidates with their rho. Among
// candidates sharing (src, dst, t_new) only the one with the larger rho is
// kept (the earlier one on a tie).
AugmentedView build_augmented_view(const graph::TemporalNeighbors& base,
                                   const CandidateSet& candidates,
                                   const Selection& selection);

}  // namespace tgsl::structure
