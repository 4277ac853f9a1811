#include "tgsl/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "tgsl/autodiff/tape.hpp"
#include "tgsl/error.hpp"

namespace tgsl::ad {
namespace {

[[noreturn]] void shape_fail(std::string_view op, const Tensor& a,
                             const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() +
                   " vs " + b.shape_string());
}

[[noreturn]] void shape_fail(std::string_view op, const std::string& what) {
  throw ShapeError(std::string(op) + ": " + what);
}

void check_finite(std::string_view op, const Tensor& t) {
  if (!verification_mode()) return;
  if (!t.value().allFinite()) {
    throw NumericError(std::string(op) + ": non-finite input " +
                       t.shape_string());
  }
}

// Wraps a freshly computed value and records it when any input needs a
// gradient and a tape is active.
Tensor finish(std::string_view op, Matrix value,
              std::initializer_list<const Tensor*> inputs,
              Tape::BackwardFn fn) {
  Tensor out = Tensor::constant(std::move(value));
  Tape* tape = active_tape();
  if (tape == nullptr) return out;
  bool needs = false;
  for (const Tensor* t : inputs) needs = needs || t->requires_grad();
  if (!needs) return out;
  out.node()->requires_grad = true;
  tape->record(op, out, std::move(fn));
  return out;
}

Tensor finish_many(std::string_view op, Matrix value,
                   std::span<const Tensor> inputs, Tape::BackwardFn fn) {
  Tensor out = Tensor::constant(std::move(value));
  Tape* tape = active_tape();
  if (tape == nullptr) return out;
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  if (!needs) return out;
  out.node()->requires_grad = true;
  tape->record(op, out, std::move(fn));
  return out;
}

// Unary element-wise op: forward f, derivative expressed via (x, y).
template <typename Forward, typename Deriv>
Tensor unary(std::string_view op, const Tensor& a, Forward f, Deriv df) {
  check_finite(op, a);
  Matrix y = a.value().unaryExpr(f);
  Tensor in = a;
  return finish(op, std::move(y), {&a},
                [in, df](const Matrix& g, const Matrix& y) mutable {
                  if (!in.requires_grad()) return;
                  in.grad_buffer().array() +=
                      g.array() * in.value().binaryExpr(y, df).array();
                });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  check_finite("matmul", a);
  check_finite("matmul", b);
  Matrix y = a.value() * b.value();
  Tensor ta = a, tb = b;
  return finish("matmul", std::move(y), {&a, &b},
                [ta, tb](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().noalias() += g * tb.value().transpose();
                  if (tb.requires_grad())
                    tb.grad_buffer().noalias() += ta.value().transpose() * g;
                });
}

Tensor transpose(const Tensor& a) {
  Matrix y = a.value().transpose();
  Tensor ta = a;
  return finish("transpose", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad()) ta.grad_buffer() += g.transpose();
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail("add", a, b);
  check_finite("add", a);
  check_finite("add", b);
  Tensor ta = a, tb = b;
  return finish("add", a.value() + b.value(), {&a, &b},
                [ta, tb](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad()) ta.grad_buffer() += g;
                  if (tb.requires_grad()) tb.grad_buffer() += g;
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail("sub", a, b);
  check_finite("sub", a);
  check_finite("sub", b);
  Tensor ta = a, tb = b;
  return finish("sub", a.value() - b.value(), {&a, &b},
                [ta, tb](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad()) ta.grad_buffer() += g;
                  if (tb.requires_grad()) tb.grad_buffer() -= g;
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail("mul", a, b);
  check_finite("mul", a);
  check_finite("mul", b);
  Tensor ta = a, tb = b;
  Matrix y = a.value().cwiseProduct(b.value());
  return finish("mul", std::move(y), {&a, &b},
                [ta, tb](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer() += g.cwiseProduct(tb.value());
                  if (tb.requires_grad())
                    tb.grad_buffer() += g.cwiseProduct(ta.value());
                });
}

Tensor affine(const Tensor& a, double factor, double shift) {
  check_finite("scale", a);
  Matrix y = (a.value().array() * factor + shift).matrix();
  Tensor ta = a;
  return finish("scale", std::move(y), {&a},
                [ta, factor](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad()) ta.grad_buffer() += factor * g;
                });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_fail("add_row", a, row);
  check_finite("add_row", a);
  check_finite("add_row", row);
  Matrix y = a.value().rowwise() + row.value().row(0);
  Tensor ta = a, tr = row;
  return finish("add_row", std::move(y), {&a, &row},
                [ta, tr](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad()) ta.grad_buffer() += g;
                  if (tr.requires_grad())
                    tr.grad_buffer() += g.colwise().sum();
                });
}

Tensor mul_col(const Tensor& a, const Tensor& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) shape_fail("mul_col", a, col);
  check_finite("mul_col", a);
  check_finite("mul_col", col);
  Matrix y = a.value().array().colwise() * col.value().col(0).array();
  Tensor ta = a, tc = col;
  return finish(
      "mul_col", std::move(y), {&a, &col},
      [ta, tc](const Matrix& g, const Matrix&) mutable {
        if (ta.requires_grad())
          ta.grad_buffer().array() +=
              g.array().colwise() * tc.value().col(0).array();
        if (tc.requires_grad())
          tc.grad_buffer().col(0) += g.cwiseProduct(ta.value()).rowwise().sum();
      });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        // Split on sign so exp never overflows.
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  if (branch_tracing()) {
    for (Index i = 0; i < a.size(); ++i) {
      const double x = a.value().data()[i];
      trace_branch(static_cast<std::int8_t>((x > 0) - (x < 0)));
    }
  }
  return unary(
      "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sin(const Tensor& a) {
  return unary(
      "sin", a, [](double x) { return std::sin(x); },
      [](double x, double) { return std::cos(x); });
}

Tensor cos(const Tensor& a) {
  return unary(
      "cos", a, [](double x) { return std::cos(x); },
      [](double x, double) { return -std::sin(x); });
}

Tensor exp(const Tensor& a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) shape_fail("clamp", "empty interval");
  if (branch_tracing()) {
    for (Index i = 0; i < a.size(); ++i) {
      const double x = a.value().data()[i];
      trace_branch(static_cast<std::int8_t>(x <= lo ? -1 : (x >= hi ? 1 : 0)));
    }
  }
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor reduce_sum(const Tensor& a) {
  check_finite("sum", a);
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  Tensor ta = a;
  return finish("sum", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().array() += g(0, 0);
                });
}

Tensor reduce_mean(const Tensor& a) {
  if (a.size() == 0) shape_fail("mean", "empty tensor");
  check_finite("mean", a);
  const double n = static_cast<double>(a.size());
  Matrix y(1, 1);
  y(0, 0) = a.value().sum() / n;
  Tensor ta = a;
  return finish("mean", std::move(y), {&a},
                [ta, n](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().array() += g(0, 0) / n;
                });
}

Tensor row_sum(const Tensor& a) {
  check_finite("row_sum", a);
  Matrix y = a.value().rowwise().sum();
  Tensor ta = a;
  return finish("row_sum", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().colwise() += g.col(0);
                });
}

Tensor logsumexp_rows(const Tensor& a) {
  if (a.cols() == 0) shape_fail("logsumexp", "no columns");
  check_finite("logsumexp", a);
  const Matrix& x = a.value();
  Matrix y(x.rows(), 1);
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    y(i, 0) = m + std::log((x.row(i).array() - m).exp().sum());
  }
  Tensor ta = a;
  return finish("logsumexp", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix& y) mutable {
                  if (!ta.requires_grad()) return;
                  Matrix& ga = ta.grad_buffer();
                  const Matrix& x = ta.value();
                  for (Index i = 0; i < x.rows(); ++i) {
                    ga.row(i).array() +=
                        g(i, 0) * (x.row(i).array() - y(i, 0)).exp();
                  }
                });
}

Tensor masked_softmax_rows(const Tensor& a, std::span<const std::uint8_t> mask) {
  if (static_cast<Index>(mask.size()) != a.size()) {
    shape_fail("masked_softmax",
               "mask size " + std::to_string(mask.size()) + " vs " +
                   a.shape_string());
  }
  check_finite("masked_softmax", a);
  const Matrix& x = a.value();
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  for (Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < x.cols(); ++j)
      if (m[i * x.cols() + j]) mx = std::max(mx, x(i, j));
    if (!std::isfinite(mx)) continue;
    double total = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      if (!m[i * x.cols() + j]) continue;
      y(i, j) = std::exp(x(i, j) - mx);
      total += y(i, j);
    }
    y.row(i) /= total;
  }
  Tensor ta = a;
  return finish("masked_softmax", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix& y) mutable {
                  if (!ta.requires_grad()) return;
                  // Masked entries have y = 0 and so receive no gradient.
                  Matrix& ga = ta.grad_buffer();
                  for (Index i = 0; i < y.rows(); ++i) {
                    const double dot = g.row(i).dot(y.row(i));
                    ga.row(i).array() +=
                        y.row(i).array() * (g.row(i).array() - dot);
                  }
                });
}

Tensor normalize_rows(const Tensor& a, double eps) {
  check_finite("normalize_rows", a);
  const Matrix& x = a.value();
  Matrix norms = x.rowwise().norm();
  Matrix y(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(i) / std::max(norms(i, 0), eps);
  Tensor ta = a;
  return finish("normalize_rows", std::move(y), {&a},
                [ta, norms, eps](const Matrix& g, const Matrix& y) mutable {
                  if (!ta.requires_grad()) return;
                  Matrix& ga = ta.grad_buffer();
                  for (Index i = 0; i < y.rows(); ++i) {
                    const double n = norms(i, 0);
                    if (n > eps) {
                      ga.row(i) += (g.row(i) - g.row(i).dot(y.row(i)) * y.row(i)) / n;
                    } else {
                      ga.row(i) += g.row(i) / eps;
                    }
                  }
                });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) shape_fail("concat_cols", "no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_fail("concat_cols", parts[0], p);
    check_finite("concat_cols", p);
    cols += p.cols();
  }
  Matrix y(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    y.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Tensor> held(parts.begin(), parts.end());
  return finish_many("concat_cols", std::move(y), parts,
                     [held](const Matrix& g, const Matrix&) mutable {
                       Index at = 0;
                       for (auto& p : held) {
                         if (p.requires_grad())
                           p.grad_buffer() += g.middleCols(at, p.cols());
                         at += p.cols();
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) shape_fail("concat_rows", "no inputs");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_fail("concat_rows", parts[0], p);
    check_finite("concat_rows", p);
    rows += p.rows();
  }
  Matrix y(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    y.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  std::vector<Tensor> held(parts.begin(), parts.end());
  return finish_many("concat_rows", std::move(y), parts,
                     [held](const Matrix& g, const Matrix&) mutable {
                       Index at = 0;
                       for (auto& p : held) {
                         if (p.requires_grad())
                           p.grad_buffer() += g.middleRows(at, p.rows());
                         at += p.rows();
                       }
                     });
}

Tensor concat_cols(std::initializer_list<Tensor> parts) {
  return concat_cols(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor concat_rows(std::initializer_list<Tensor> parts) {
  return concat_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice_cols(const Tensor& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    shape_fail("slice_cols", "range [" + std::to_string(begin) + ", " +
                                 std::to_string(begin + count) + ") of " +
                                 a.shape_string());
  }
  Matrix y = a.value().middleCols(begin, count);
  Tensor ta = a;
  return finish("slice_cols", std::move(y), {&a},
                [ta, begin, count](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().middleCols(begin, count) += g;
                });
}

Tensor reshape(const Tensor& a, Index rows, Index cols) {
  if (rows * cols != a.size()) {
    shape_fail("reshape", a.shape_string() + " to [" + std::to_string(rows) +
                              "x" + std::to_string(cols) + "]");
  }
  Matrix y = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  Tensor ta = a;
  return finish("reshape", std::move(y), {&a},
                [ta](const Matrix& g, const Matrix&) mutable {
                  if (!ta.requires_grad()) return;
                  Matrix& ga = ta.grad_buffer();
                  Eigen::Map<Matrix>(ga.data(), g.rows(), g.cols()) += g;
                });
}

Tensor slice_rows(const Tensor& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    shape_fail("slice_rows", "range [" + std::to_string(begin) + ", " +
                                 std::to_string(begin + count) + ") of " +
                                 a.shape_string());
  }
  Matrix y = a.value().middleRows(begin, count);
  Tensor ta = a;
  return finish("slice_rows", std::move(y), {&a},
                [ta, begin, count](const Matrix& g, const Matrix&) mutable {
                  if (ta.requires_grad())
                    ta.grad_buffer().middleRows(begin, count) += g;
                });
}

Tensor gather_rows(const Tensor& a, std::span<const Index> index) {
  const Index n = static_cast<Index>(index.size());
  Matrix y = Matrix::Zero(n, a.cols());
  for (Index i = 0; i < n; ++i) {
    const Index r = index[i];
    if (r >= a.rows()) {
      shape_fail("gather_rows", "row " + std::to_string(r) + " of " +
                                    a.shape_string());
    }
    if (r >= 0) y.row(i) = a.value().row(r);
  }
  check_finite("gather_rows", a);
  Tensor ta = a;
  std::vector<Index> idx(index.begin(), index.end());
  return finish("gather_rows", std::move(y), {&a},
                [ta, idx = std::move(idx)](const Matrix& g,
                                           const Matrix&) mutable {
                  if (!ta.requires_grad()) return;
                  Matrix& ga = ta.grad_buffer();
                  for (std::size_t i = 0; i < idx.size(); ++i)
                    if (idx[i] >= 0) ga.row(idx[i]) += g.row(i);
                });
}

Tensor segment_mean(const Tensor& a, std::span<const Index> offsets) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != a.rows()) {
    shape_fail("segment_mean", "offsets must span [0, " +
                                   std::to_string(a.rows()) + "]");
  }
  check_finite("segment_mean", a);
  const Index groups = static_cast<Index>(offsets.size()) - 1;
  Matrix y = Matrix::Zero(groups, a.cols());
  for (Index s = 0; s < groups; ++s) {
    const Index lo = offsets[s], hi = offsets[s + 1];
    if (hi < lo) shape_fail("segment_mean", "offsets not non-decreasing");
    if (hi > lo) y.row(s) = a.value().middleRows(lo, hi - lo).colwise().sum() /
                            static_cast<double>(hi - lo);
  }
  Tensor ta = a;
  std::vector<Index> off(offsets.begin(), offsets.end());
  return finish("segment_mean", std::move(y), {&a},
                [ta, off = std::move(off)](const Matrix& g,
                                           const Matrix&) mutable {
                  if (!ta.requires_grad()) return;
                  Matrix& ga = ta.grad_buffer();
                  for (std::size_t s = 0; s + 1 < off.size(); ++s) {
                    const Index lo = off[s], hi = off[s + 1];
                    if (hi == lo) continue;
                    const double inv = 1.0 / static_cast<double>(hi - lo);
                    for (Index r = lo; r < hi; ++r) ga.row(r) += inv * g.row(s);
                  }
                });
}

Tensor group_dot(const Tensor& q, const Tensor& keys) {
  const Index b = q.rows();
  if (b == 0 || keys.cols() != q.cols() || keys.rows() % b != 0) {
    shape_fail("group_dot", q, keys);
  }
  check_finite("group_dot", q);
  check_finite("group_dot", keys);
  const Index n = keys.rows() / b;
  Matrix y(b, n);
  for (Index i = 0; i < b; ++i)
    y.row(i) = q.value().row(i) * keys.value().middleRows(i * n, n).transpose();
  Tensor tq = q, tk = keys;
  return finish("group_dot", std::move(y), {&q, &keys},
                [tq, tk, b, n](const Matrix& g, const Matrix&) mutable {
                  if (tq.requires_grad()) {
                    Matrix& gq = tq.grad_buffer();
                    for (Index i = 0; i < b; ++i)
                      gq.row(i) += g.row(i) * tk.value().middleRows(i * n, n);
                  }
                  if (tk.requires_grad()) {
                    Matrix& gk = tk.grad_buffer();
                    for (Index i = 0; i < b; ++i)
                      gk.middleRows(i * n, n) +=
                          g.row(i).transpose() * tq.value().row(i);
                  }
                });
}

Tensor group_weighted_sum(const Tensor& w, const Tensor& values) {
  const Index b = w.rows();
  const Index n = w.cols();
  if (values.rows() != b * n) shape_fail("group_weighted_sum", w, values);
  check_finite("group_weighted_sum", w);
  check_finite("group_weighted_sum", values);
  Matrix y(b, values.cols());
  for (Index i = 0; i < b; ++i)
    y.row(i) = w.value().row(i) * values.value().middleRows(i * n, n);
  Tensor tw = w, tv = values;
  return finish("group_weighted_sum", std::move(y), {&w, &values},
                [tw, tv, b, n](const Matrix& g, const Matrix&) mutable {
                  if (tw.requires_grad()) {
                    Matrix& gw = tw.grad_buffer();
                    for (Index i = 0; i < b; ++i)
                      gw.row(i) += g.row(i) *
                                   tv.value().middleRows(i * n, n).transpose();
                  }
                  if (tv.requires_grad()) {
                    Matrix& gv = tv.grad_buffer();
                    for (Index i = 0; i < b; ++i)
                      gv.middleRows(i * n, n) +=
                          tw.value().row(i).transpose() * g.row(i);
                  }
                });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_row(y, bias) : y;
}

}  // namespace tgsl::ad
