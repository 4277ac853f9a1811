#include "tgsl/encoder/time_encoding.hpp"

#include <cmath>

#include "tgsl/error.hpp"

namespace tgsl::encoder {

TimeEncoding::TimeEncoding(ad::Index dim, double alpha, double beta)
    : alpha_(alpha), beta_(beta), omega_(dim) {
  if (dim < 1) throw ConfigError("time encoding: dimension must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("time encoding: alpha and beta must be positive");
  }
  for (ad::Index i = 0; i < dim; ++i) {
    omega_(i) = std::pow(alpha, -static_cast<double>(i) / beta);
  }
}

TimeEncoding::TimeEncoding(ad::Index dim)
    : TimeEncoding(dim, std::sqrt(static_cast<double>(dim)),
                   std::sqrt(static_cast<double>(dim))) {}

ad::RowVector TimeEncoding::encode(double t) const {
  return (t * omega_.array()).cos().matrix();
}

ad::RowVector TimeEncoding::context(double delta) const {
  return ((delta * omega_.array()).sin() + 1.0).matrix();
}

ad::Matrix TimeEncoding::encode_rows(std::span<const double> times) const {
  ad::Matrix out(static_cast<ad::Index>(times.size()), dim());
  for (std::size_t i = 0; i < times.size(); ++i)
    out.row(static_cast<ad::Index>(i)) = encode(times[i]);
  return out;
}

ad::Matrix TimeEncoding::context_rows(std::span<const double> deltas) const {
  ad::Matrix out(static_cast<ad::Index>(deltas.size()), dim());
  for (std::size_t i = 0; i < deltas.size(); ++i)
    out.row(static_cast<ad::Index>(i)) = context(deltas[i]);
  return out;
}

}  // namespace tgsl::encoder
