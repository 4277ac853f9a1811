#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::ad {

struct SkippedCoordinate {
  std::string parameter;
  Index flat_index = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_parameter;
  Index worst_index = -1;
  // Coordinates whose +h / -h evaluations took different branches of a
  // piecewise primitive (relu kink, clamp edge, changed top-k selection).
  std::vector<SkippedCoordinate> skipped;
};

// Compares the tape gradient of the scalar `fn` w.r.t. every coordinate of
// `params` with central differences of step h. Error per coordinate is
// |analytic - numeric| / max(1, |numeric|). `fn` must be deterministic and
// build its graph from the current parameter values.
GradCheckReport grad_check(const std::function<Tensor()>& fn,
                           std::span<Tensor> params, double h = 1e-5);

}  // namespace tgsl::ad
