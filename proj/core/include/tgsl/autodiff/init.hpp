#pragma once

#include <random>
#include <string>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::ad {

// Parameter drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor uniform_parameter(Index rows, Index cols, Index fan_in,
                         std::mt19937_64& rng, std::string name);

}  // namespace tgsl::ad
