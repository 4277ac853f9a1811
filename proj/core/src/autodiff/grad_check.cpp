#include "tgsl/autodiff/grad_check.hpp"

#include <cmath>
#include <cstdint>

#include "tgsl/autodiff/tape.hpp"
#include "tgsl/error.hpp"

namespace tgsl::ad {
namespace {

double evaluate(const std::function<Tensor()>& fn,
                std::vector<std::int8_t>& branches) {
  NoGradScope no_grad;
  VerificationScope verify;
  BranchTraceScope trace(branches);
  const double v = fn().item();
  if (!std::isfinite(v)) {
    throw NumericError("grad_check: function is non-finite at a perturbed point");
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& fn,
                           std::span<Tensor> params, double h) {
  for (auto& p : params) p.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    VerificationScope verify;
    Tensor loss = fn();
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  GradCheckReport report;
  std::vector<std::int8_t> plus_branches, minus_branches;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    for (Index i = 0; i < p.size(); ++i) {
      double& x = p.mutable_value().data()[i];
      const double original = x;
      plus_branches.clear();
      minus_branches.clear();
      x = original + h;
      const double f_plus = evaluate(fn, plus_branches);
      x = original - h;
      const double f_minus = evaluate(fn, minus_branches);
      x = original;

      if (plus_branches != minus_branches) {
        report.skipped.push_back({p.name(), i});
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double err = std::abs(analytic[k].data()[i] - numeric) /
                         std::max(1.0, std::abs(numeric));
      ++report.checked;
      if (err > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = err;
        report.worst_parameter = p.name();
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace tgsl::ad
