#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgsl/autodiff/tensor.hpp"

// Differentiable primitives over 2-D row-major tensors. Vectors are 1xN rows
// unless noted. Every op validates shapes and throws ShapeError naming the op
// and the offending shapes.
namespace tgsl::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Element-wise (Hadamard) product.
Tensor mul(const Tensor& a, const Tensor& b);
// scale * a + shift
Tensor affine(const Tensor& a, double scale, double shift = 0.0);
inline Tensor scale(const Tensor& a, double factor) {
  return affine(a, factor, 0.0);
}

// a[m x n] + row[1 x n] broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);
// a[m x n] scaled row-wise by col[m x 1].
Tensor mul_col(const Tensor& a, const Tensor& col);

Tensor sigmoid(const Tensor& a);
// Subgradient at 0 is 0.
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// Gradient flows only where lo < a < hi.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor reduce_sum(const Tensor& a);
Tensor reduce_mean(const Tensor& a);
// [m x n] -> [m x 1]
Tensor row_sum(const Tensor& a);
// [m x n] -> [m x 1], numerically stable.
Tensor logsumexp_rows(const Tensor& a);
// Softmax along each row restricted to entries with mask != 0. Rows with no
// unmasked entry produce zeros.
Tensor masked_softmax_rows(const Tensor& a, std::span<const std::uint8_t> mask);
// Each row divided by max(||row||, eps).
Tensor normalize_rows(const Tensor& a, double eps = 1e-12);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
Tensor slice_cols(const Tensor& a, Index begin, Index count);
// Same elements in row-major order under a new shape.
Tensor reshape(const Tensor& a, Index rows, Index cols);
Tensor slice_rows(const Tensor& a, Index begin, Index count);

// out.row(i) = a.row(index[i]), or zeros when index[i] < 0.
Tensor gather_rows(const Tensor& a, std::span<const Index> index);
// Mean of each contiguous row segment [offsets[g], offsets[g+1]); empty
// segments yield zero rows.
Tensor segment_mean(const Tensor& a, std::span<const Index> offsets);

// Grouped attention helpers. keys/values hold n consecutive rows per query.
// out(i, j) = <q.row(i), keys.row(i*n + j)>, shape [B x n].
Tensor group_dot(const Tensor& q, const Tensor& keys);
// out.row(i) = sum_j w(i, j) * values.row(i*n + j), shape [B x d].
Tensor group_weighted_sum(const Tensor& w, const Tensor& values);

// x * W + b (b may be undefined).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

}  // namespace tgsl::ad
