#pragma once

#include <span>

#include "tgsl/autodiff/tensor.hpp"

namespace tgsl::encoder {

// Fixed (non-learnable) frequencies omega_i = alpha^(-(i-1)/beta), i = 1..d.
class TimeEncoding {
 public:
  TimeEncoding(ad::Index dim, double alpha, double beta);
  // alpha = beta = sqrt(dim).
  explicit TimeEncoding(ad::Index dim);

  ad::Index dim() const { return omega_.cols(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const ad::RowVector& omega() const { return omega_; }

  // cos(t * omega)
  ad::RowVector encode(double t) const;
  // sin(delta * omega) + 1; delta may be negative.
  ad::RowVector context(double delta) const;

  // Row i = encode(times[i]) / context(deltas[i]).
  ad::Matrix encode_rows(std::span<const double> times) const;
  ad::Matrix context_rows(std::span<const double> deltas) const;

 private:
  double alpha_;
  double beta_;
  ad::RowVector omega_;
};

}  // namespace tgsl::encoder
