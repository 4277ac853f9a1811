#include "tgsl/structure/structure_learner.hpp"

#include <random>

#include "tgsl/error.hpp"

namespace tgsl::structure {

StructureParams StructureParams::init(const StructureConfig& config,
                                      ad::Index node_dim, ad::Index edge_dim,
                                      ad::Index time_dim, std::uint64_t seed) {
  if (config.etgnn_layers < 1) {
    throw ConfigError("structure: etgnn_layers must be >= 1");
  }
  std::mt19937_64 rng(seed);
  StructureParams p;
  p.etgnn = EtgnnParams::init(config.etgnn_layers, node_dim, edge_dim,
                              time_dim, time_dim, rng);
  p.lstm = LstmParams::init(time_dim, time_dim, rng);
  return p;
}

std::vector<ad::Tensor> StructureParams::parameters() const {
  auto out = etgnn.parameters();
  for (auto& t : lstm.parameters()) out.push_back(t);
  return out;
}

StructureParams StructureParams::clone() const {
  return {etgnn.clone(), lstm.clone()};
}

Augmentation augment(std::span<const graph::NodeId> sources, double cutoff,
                     const graph::TemporalNeighbors& base,
                     const StructureData& data, const StructureParams& params,
                     const StructureConfig& config, SelectionMode mode,
                     std::uint64_t seed,
                     const encoder::TimeEncoding& time_encoding) {
  if (data.store == nullptr || data.visible == nullptr) {
    throw std::invalid_argument("structure: store and visible index required");
  }
  std::mt19937_64 rng(seed);
  CandidateSet candidates =
      sample_candidates(sources, config.candidates, *data.store, *data.visible,
                        cutoff, data.random_pool, data.t_max, rng());

  std::vector<graph::EventId> required;
  for (auto u : sources) {
    for (auto e : context_events(*data.visible, u, cutoff, config.n_rnn))
      required.push_back(e);
  }
  for (const auto& c : candidates.edges) {
    if (c.feature_event != graph::kNoEvent) required.push_back(c.feature_event);
  }
  EtgnnOutput etgnn =
      etgnn_forward(required, {}, *data.store, *data.visible, cutoff,
                    params.etgnn, config.etgnn_fanout, time_encoding);
  ad::Tensor contexts = context_predict(sources, *data.visible, cutoff,
                                        config.n_rnn, etgnn.edges, params.lstm);
  ad::Tensor logits = candidate_logits(contexts, etgnn.edges, candidates,
                                       data.t_max, time_encoding);
  Selection selection = gumbel_topk_select(logits, candidates.offsets, config.k,
                                           config.tau, mode, rng);
  AugmentedView view = build_augmented_view(base, candidates, selection);
  return {std::move(candidates), contexts, logits, std::move(selection),
          std::move(view)};
}

}  // namespace tgsl::structure
