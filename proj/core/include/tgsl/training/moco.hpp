#pragma once

#include <cstddef>

#include "tgsl/autodiff/tensor.hpp"
#include "tgsl/encoder/tgat.hpp"

namespace tgsl::training {

// Fixed-capacity FIFO of key vectors.
class KeyQueue {
 public:
  KeyQueue(std::size_t capacity, ad::Index dim);

  // Appends rows of `keys`, dropping the oldest past capacity.
  void push(const ad::Matrix& keys);
  // Current keys, oldest first.
  ad::Matrix keys() const;
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  ad::Index dim() const { return buffer_.cols(); }

 private:
  std::size_t capacity_;
  ad::Matrix buffer_;
  std::size_t head_ = 0;  // slot of the oldest key
  std::size_t count_ = 0;
};

// Momentum key encoder and its key queue. Key parameters are constants, so
// no op on them is ever recorded.
struct MoCoState {
  encoder::EncoderParams key_params;
  KeyQueue queue;
  double momentum = 0.999;
  double tau = 0.2;
};

// Constant copy of `params` (no gradient slots, never recorded).
encoder::EncoderParams frozen_copy(const encoder::EncoderParams& params);

MoCoState moco_init(const encoder::EncoderParams& query_params,
                    std::size_t capacity, double momentum, double tau);

// key <- momentum * key + (1 - momentum) * query for every parameter, then
// enqueue `new_keys` (one key per row). Throws ShapeError on a dimension
// mismatch.
void moco_step(MoCoState& state, const encoder::EncoderParams& query_params,
               const ad::Matrix& new_keys);

}  // namespace tgsl::training
