#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::ad {

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  // One entry per parameter, shaped like it; sized on the first step.
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

// One bias-corrected Adam update over `params`, then zeroes their gradients.
// Throws std::invalid_argument naming any parameter without a gradient.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace tgsl::ad
