#include "tgsl/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tgsl/error.hpp"

namespace tgsl::ad {

void adam_step(std::span<Tensor> params, AdamState& state) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      const auto& name = params[i].name();
      throw std::invalid_argument(
          "adam_step: missing gradient for parameter '" +
          (name.empty() ? std::to_string(i) : name) + "'");
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
      state.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " +
                     std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(state.beta1, t);
  const double correct2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    if (m.rows() != p.rows() || m.cols() != p.cols()) {
      throw ShapeError("adam_step: moment shape drifted for '" + p.name() +
                       "'");
    }
    const Matrix& g = p.grad_buffer();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.mutable_value().array() -=
        state.lr * (m.array() / correct1) /
        ((v.array() / correct2).sqrt() + state.epsilon);
    p.zero_grad();
  }
}

}  // namespace tgsl::ad
