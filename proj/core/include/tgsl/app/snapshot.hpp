#pragma once

#include <string>

#include "tgsl/training/trainer.hpp"

namespace tgsl::app {

// JSON document {"<parameter name>": {"rows", "cols", "values"}, ...} over
// every model parameter. Doubles round-trip exactly.
std::string snapshot_json(const training::Model& model);

// Overwrites the values of `model` (already shaped by its configs) from a
// snapshot. Throws DataError on a missing parameter or a shape mismatch.
void restore_snapshot(training::Model& model, const std::string& json);

}  // namespace tgsl::app
