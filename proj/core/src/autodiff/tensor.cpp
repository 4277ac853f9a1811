#include "tgsl/autodiff/tensor.hpp"

#include "tgsl/error.hpp"

namespace tgsl::ad {

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<TensorNode>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value, std::string name) {
  auto node = std::make_shared<TensorNode>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->is_parameter = true;
  node->name = std::move(name);
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Index rows, Index cols) {
  return constant(Matrix::Zero(rows, cols));
}

Tensor Tensor::scalar(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Tensor Tensor::row(const RowVector& value) {
  return constant(Matrix(value));
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows()) + "x" + std::to_string(cols()) + "]";
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item: tensor " + shape_string() + " is not a scalar");
  }
  return node_->value(0, 0);
}

Matrix Tensor::grad() const {
  if (has_grad()) return node_->grad;
  return Matrix::Zero(rows(), cols());
}

Matrix& Tensor::grad_buffer() {
  if (!has_grad()) node_->grad = Matrix::Zero(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad = Matrix::Zero(rows(), cols()); }

Tensor Tensor::clone() const {
  auto node = std::make_shared<TensorNode>(*node_);
  return Tensor(std::move(node));
}

}  // namespace tgsl::ad
