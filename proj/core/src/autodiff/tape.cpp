#include "tgsl/autodiff/tape.hpp"

#include "tgsl/error.hpp"

namespace tgsl::ad {
namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local bool g_verification = false;
thread_local std::vector<std::int8_t>* g_branch_sink = nullptr;

}  // namespace

void Tape::record(std::string_view op, const Tensor& output, BackwardFn fn) {
  records_.push_back(Record{op, output, std::move(fn)});
}

void Tape::backward(const Tensor& loss,
                    const std::function<void(std::size_t)>& on_visit) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " +
                     (loss.defined() ? loss.shape_string() : "undefined"));
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument(
        "backward: loss was not produced under an active tape");
  }
  for (auto& rec : records_) rec.output.clear_grad();
  Tensor seed = loss;
  seed.grad_buffer().setConstant(1.0);

  for (std::size_t i = records_.size(); i-- > 0;) {
    auto& rec = records_[i];
    if (!rec.output.has_grad()) continue;
    if (on_visit) on_visit(i);
    rec.backward(rec.output.node()->grad, rec.output.value());
  }
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) {
  g_active_tape = nullptr;
}
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

bool verification_mode() { return g_verification; }

VerificationScope::VerificationScope(bool enabled)
    : previous_(g_verification) {
  g_verification = enabled;
}
VerificationScope::~VerificationScope() { g_verification = previous_; }

void trace_branch(std::int8_t branch) {
  if (g_branch_sink) g_branch_sink->push_back(branch);
}
bool branch_tracing() { return g_branch_sink != nullptr; }

BranchTraceScope::BranchTraceScope(std::vector<std::int8_t>& sink)
    : previous_(g_branch_sink) {
  g_branch_sink = &sink;
}
BranchTraceScope::~BranchTraceScope() { g_branch_sink = previous_; }

}  // namespace tgsl::ad
