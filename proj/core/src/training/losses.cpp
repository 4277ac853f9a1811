#include "tgsl/training/losses.hpp"

#include <string>

#include "tgsl/autodiff/ops.hpp"
#include "tgsl/error.hpp"

namespace tgsl::training {

using ad::Tensor;

Tensor bce_link_loss(const Tensor& positive, const Tensor& negative,
                     bool* clamped) {
  if (positive.cols() != 1 || negative.cols() != 1 ||
      positive.rows() != negative.rows() || positive.rows() == 0) {
    throw ShapeError("bce_link_loss: need equal non-empty columns, got " +
                     positive.shape_string() + " and " +
                     negative.shape_string());
  }
  constexpr double lo = kProbabilityEpsilon, hi = 1.0 - kProbabilityEpsilon;
  if (clamped != nullptr) {
    auto outside = [&](const ad::Matrix& m) {
      return (m.array() <= lo).any() || (m.array() >= hi).any();
    };
    *clamped = outside(positive.value()) || outside(negative.value());
  }
  Tensor pos_terms = ad::log(ad::clamp(positive, lo, hi));
  Tensor neg_terms = ad::log(ad::affine(ad::clamp(negative, lo, hi), -1.0, 1.0));
  return ad::scale(ad::reduce_mean(ad::concat_rows({pos_terms, neg_terms})),
                   -1.0);
}

Tensor info_nce_loss(const Tensor& queries, const Tensor& keys,
                     const ad::Matrix& queue, double tau, bool* empty_queue) {
  if (!(tau > 0.0)) throw ConfigError("info_nce: tau must be > 0");
  if (queries.rows() != keys.rows() || queries.cols() != keys.cols() ||
      queries.rows() == 0) {
    throw ShapeError("info_nce: queries " + queries.shape_string() +
                     " vs keys " + keys.shape_string());
  }
  if (queue.rows() > 0 && queue.cols() != queries.cols()) {
    throw ShapeError("info_nce: queue has " + std::to_string(queue.cols()) +
                     " columns, queries " + std::to_string(queries.cols()));
  }
  if (empty_queue != nullptr) *empty_queue = queue.rows() == 0;
  Tensor q = ad::normalize_rows(queries);
  Tensor k = ad::normalize_rows(keys);
  Tensor positive = ad::row_sum(ad::mul(q, k));
  Tensor logits = positive;
  if (queue.rows() > 0) {
    logits = ad::concat_cols(
        {positive, ad::matmul(q, Tensor::constant(queue.transpose()))});
  }
  logits = ad::scale(logits, 1.0 / tau);
  Tensor per_row = ad::sub(ad::logsumexp_rows(logits),
                           ad::slice_cols(logits, 0, 1));
  return ad::reduce_mean(per_row);
}

}  // namespace tgsl::training
