#include "tgsl/training/moco.hpp"

#include <string>

#include "tgsl/error.hpp"

namespace tgsl::training {

using ad::Matrix;
using ad::Tensor;

KeyQueue::KeyQueue(std::size_t capacity, ad::Index dim)
    : capacity_(capacity), buffer_(static_cast<ad::Index>(capacity), dim) {
  if (capacity == 0) throw ConfigError("key queue: capacity must be >= 1");
}

void KeyQueue::push(const Matrix& keys) {
  if (keys.cols() != buffer_.cols()) {
    throw ShapeError("key queue: key dim " + std::to_string(keys.cols()) +
                     " vs " + std::to_string(buffer_.cols()));
  }
  for (ad::Index r = 0; r < keys.rows(); ++r) {
    const std::size_t slot = (head_ + count_) % capacity_;
    buffer_.row(static_cast<ad::Index>(slot)) = keys.row(r);
    if (count_ < capacity_) {
      ++count_;
    } else {
      head_ = (head_ + 1) % capacity_;
    }
  }
}

Matrix KeyQueue::keys() const {
  Matrix out(static_cast<ad::Index>(count_), buffer_.cols());
  for (std::size_t i = 0; i < count_; ++i) {
    out.row(static_cast<ad::Index>(i)) =
        buffer_.row(static_cast<ad::Index>((head_ + i) % capacity_));
  }
  return out;
}

encoder::EncoderParams frozen_copy(const encoder::EncoderParams& params) {
  encoder::EncoderParams out = params.clone();
  auto freeze = [](Tensor& t) { t = Tensor::constant(t.value()); };
  for (auto& l : out.layers) {
    for (Tensor* t : {&l.w_query, &l.w_key, &l.w_value, &l.merge_w1,
                      &l.merge_b1, &l.merge_w2, &l.merge_b2})
      freeze(*t);
  }
  for (Tensor* t : {&out.head.w1, &out.head.b1, &out.head.w2, &out.head.b2})
    freeze(*t);
  return out;
}

MoCoState moco_init(const encoder::EncoderParams& query_params,
                    std::size_t capacity, double momentum, double tau) {
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw ConfigError("moco: momentum must lie in [0, 1]");
  }
  if (!(tau > 0.0)) throw ConfigError("moco: tau must be > 0");
  return {frozen_copy(query_params),
          KeyQueue(capacity, query_params.config.hidden_dim), momentum, tau};
}

void moco_step(MoCoState& state, const encoder::EncoderParams& query_params,
               const Matrix& new_keys) {
  auto keys = state.key_params.parameters();
  auto queries = query_params.parameters();
  if (keys.size() != queries.size()) {
    throw ShapeError("moco: key and query parameter counts differ");
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].rows() != queries[i].rows() ||
        keys[i].cols() != queries[i].cols()) {
      throw ShapeError("moco: parameter " + queries[i].name() + " " +
                       queries[i].shape_string() + " vs key " +
                       keys[i].shape_string());
    }
  }
  if (new_keys.rows() > 0 && new_keys.cols() != state.queue.dim()) {
    throw ShapeError("moco: key dim " + std::to_string(new_keys.cols()) +
                     " vs queue dim " + std::to_string(state.queue.dim()));
  }
  const double m = state.momentum;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (m == 1.0) continue;
    Matrix& k = keys[i].mutable_value();
    k = m * k + (1.0 - m) * queries[i].value();
  }
  state.queue.push(new_keys);
}

}  // namespace tgsl::training
