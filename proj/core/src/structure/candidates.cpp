#include "tgsl/structure/candidates.hpp"

#include <random>

#include "tgsl/error.hpp"
#include "tgsl/graph/sampling.hpp"

namespace tgsl::structure {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kOneHop:
      return "one-hop";
    case Strategy::kThirdHop:
      return "third-hop";
    case Strategy::kRandom:
      return "random";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kOneHop, Strategy::kThirdHop, Strategy::kRandom}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

CandidateSet sample_candidates(std::span<const graph::NodeId> sources,
                               const CandidateConfig& config,
                               const graph::EventStore& store,
                               const graph::NeighborIndex& visible,
                               double cutoff,
                               std::span<const graph::NodeId> random_pool,
                               double t_max, std::uint64_t seed) {
  if (!(t_max >= 0.0)) throw ConfigError("candidates: t_max must be >= 0");
  if (config.strategy == Strategy::kThirdHop && config.hop_fanouts.empty()) {
    throw ConfigError("candidates: third-hop needs hop fanouts");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time_dist(0.0, t_max);
  CandidateSet out;
  out.offsets.push_back(0);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const graph::NodeId u = sources[i];
    auto emit = [&](graph::NodeId dst, graph::EventId event, double t_sample) {
      CandidateEdge c;
      c.src = u;
      c.dst = dst;
      c.t_new = time_dist(rng);
      c.strategy = config.strategy;
      c.feature_event = event;
      c.t_sample = event == graph::kNoEvent ? c.t_new : t_sample;
      c.source = i;
      out.edges.push_back(c);
    };
    switch (config.strategy) {
      case Strategy::kOneHop: {
        auto history = visible.history_before(u, cutoff);
        if (history.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, history.size() - 1);
        for (std::size_t k = 0; k < config.per_source; ++k) {
          const auto& e = history[pick(rng)];
          emit(e.neighbor, e.event, e.timestamp);
        }
        break;
      }
      case Strategy::kThirdHop: {
        auto endpoints =
            graph::khop_sample(visible, u, cutoff, config.hop_fanouts, rng());
        if (endpoints.size() > config.per_source)
          endpoints.resize(config.per_source);
        for (const auto& ep : endpoints) {
          emit(ep.dst, ep.borrowed_event,
               store.event(ep.borrowed_event).timestamp);
        }
        break;
      }
      case Strategy::kRandom: {
        if (random_pool.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0,
                                                        random_pool.size() - 1);
        for (std::size_t k = 0; k < config.per_source; ++k)
          emit(random_pool[pick(rng)], graph::kNoEvent, 0.0);
        break;
      }
    }
    out.offsets.push_back(out.edges.size());
  }
  return out;
}

}  // namespace tgsl::structure
