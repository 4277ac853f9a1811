#pragma once

#include <limits>

namespace tgsl::training {

struct EarlyStopState {
  int patience = 3;
  double tolerance = 1e-3;
  int max_epochs = 50;
  double best = -std::numeric_limits<double>::infinity();
  // 1-based epoch of `best`; 0 before any update.
  int best_epoch = 0;
  int since_improvement = 0;
  int epoch = 0;
};

enum class StopDecision { kContinue, kStop };

// Records one epoch's validation AP. An improvement is ap > best + tolerance
// and resets the counter; training stops once the counter exceeds patience
// or the epoch count reaches max_epochs.
StopDecision early_stop_update(EarlyStopState& state, double val_ap);

}  // namespace tgsl::training
