#pragma once

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::training {

inline constexpr double kProbabilityEpsilon = 1e-7;

// Mean binary cross entropy over positives (label 1) and negatives
// (label 0); both are [n x 1] probabilities. Scores are clamped to
// [eps, 1 - eps]; `clamped` is set when any score hit the clamp.
ad::Tensor bce_link_loss(const ad::Tensor& positive, const ad::Tensor& negative,
                         bool* clamped = nullptr);

// Mean InfoNCE over rows: -log softmax of q_i . k_i against
// {q_i . k_i} u {q_i . queue_j}, all divided by tau. Queries and positive
// keys are L2-normalized here; queue rows are used as given. An empty queue
// yields zero loss and sets `empty_queue`.
ad::Tensor info_nce_loss(const ad::Tensor& queries, const ad::Tensor& keys,
                         const ad::Matrix& queue, double tau,
                         bool* empty_queue = nullptr);

}  // namespace tgsl::training
