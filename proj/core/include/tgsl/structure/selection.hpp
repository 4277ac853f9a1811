#pragma once

#include <random>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/encoder/time_encoding.hpp"
#include "tgsl/structure/candidates.hpp"
#include "tgsl/structure/etgnn.hpp"

namespace tgsl::structure {

struct ProjectedPair {
  ad::Tensor context;
  ad::Tensor feature;
};

// Row-wise projection to the new timestamps:
// context_i * s(t_new_i - t_max) and feature_i * s(t_new_i - t_sample_i).
ProjectedPair time_map(const ad::Tensor& context, const ad::Tensor& feature,
                       std::span<const double> t_new, double t_max,
                       std::span<const double> t_sample,
                       const encoder::TimeEncoding& time_encoding);

// Logit per candidate, [C x 1]: inner product of the projected context of
// its source (row `source` of `contexts`) and its projected feature.
ad::Tensor candidate_logits(const ad::Tensor& contexts,
                            const EdgeEmbeddings& edges,
                            const CandidateSet& candidates, double t_max,
                            const encoder::TimeEncoding& time_encoding);

enum class SelectionMode { kStochastic, kNoiseFree };

// log(u) - log(1 - u)
double logistic_noise(double u);
// Uniform draw on the open interval (0, 1).
double open_uniform(std::mt19937_64& rng);

// Indices of the k largest scores in each group [offsets[g], offsets[g+1]),
// ascending within a group. Ties keep the earlier index.
std::vector<std::size_t> top_k_per_group(std::span<const double> scores,
                                         std::span<const std::size_t> offsets,
                                         std::size_t k);

struct Selection {
  // Candidate indices, grouped by source.
  std::vector<std::size_t> selected;
  // sigmoid((noise + logit) / tau) for every candidate, [C x 1].
  ad::Tensor rho;
};

// Relaxed top-k: perturbs each logit with logistic noise (zero in noise-free
// mode), squashes by the tempered sigmoid, and keeps the k largest per source.
// Throws ConfigError when tau <= 0.
Selection gumbel_topk_select(const ad::Tensor& logits,
                             std::span<const std::size_t> offsets,
                             std::size_t k, double tau, SelectionMode mode,
                             std::mt19937_64& rng);

}  // namespace tgsl::structure
