#include "tgsl/training/early_stop.hpp"

namespace tgsl::training {

StopDecision early_stop_update(EarlyStopState& state, double val_ap) {
  ++state.epoch;
  if (val_ap > state.best + state.tolerance) {
    state.best = val_ap;
    state.best_epoch = state.epoch;
    state.since_improvement = 0;
  } else {
    ++state.since_improvement;
  }
  if (state.since_improvement > state.patience ||
      state.epoch >= state.max_epochs) {
    return StopDecision::kStop;
  }
  return StopDecision::kContinue;
}

}  // namespace tgsl::training
