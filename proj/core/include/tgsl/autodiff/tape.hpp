#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::ad {

// Ordered record of executed primitives. Ops record themselves on the
// thread's active tape (see TapeScope) when any input requires a gradient;
// with no active tape nothing is recorded and outputs are constants.
class Tape {
 public:
  // Receives the output gradient and the output value.
  using BackwardFn = std::function<void(const Matrix&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::string_view op, const Tensor& output, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and replays every record in reverse order.
  // Intermediate gradients are reset first, so leaves accumulate across
  // repeated calls while intermediates do not.
  void backward(const Tensor& loss,
                const std::function<void(std::size_t)>& on_visit = {});

  std::size_t size() const { return records_.size(); }
  std::string_view op_name(std::size_t i) const { return records_[i].op; }
  void clear() { records_.clear(); }

 private:
  struct Record {
    std::string_view op;
    Tensor output;
    BackwardFn backward;
  };
  std::vector<Record> records_;
};

Tape* active_tape();

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Suspends recording for the current thread.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

// Verification mode: primitives reject non-finite inputs.
bool verification_mode();

class VerificationScope {
 public:
  explicit VerificationScope(bool enabled = true);
  ~VerificationScope();
  VerificationScope(const VerificationScope&) = delete;
  VerificationScope& operator=(const VerificationScope&) = delete;

 private:
  bool previous_;
};

// Branch trace: piecewise primitives (relu, clamp) and discrete selections
// append the branch they took, so a finite-difference harness can tell when
// a perturbation crossed a kink.
void trace_branch(std::int8_t branch);
bool branch_tracing();

class BranchTraceScope {
 public:
  explicit BranchTraceScope(std::vector<std::int8_t>& sink);
  ~BranchTraceScope();
  BranchTraceScope(const BranchTraceScope&) = delete;
  BranchTraceScope& operator=(const BranchTraceScope&) = delete;

 private:
  std::vector<std::int8_t>* previous_;
};

}  // namespace tgsl::ad
