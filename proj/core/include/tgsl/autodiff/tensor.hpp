#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace tgsl::ad {

using Index = Eigen::Index;
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct TensorNode {
  Matrix value;
  // Empty until a gradient flows in or zero_grad() allocates it.
  Matrix grad;
  bool requires_grad = false;
  bool is_parameter = false;
  std::string name;
};

// Shared handle to a dense row-major grid with an optional gradient slot.
// Copies alias the same storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix value);
  static Tensor parameter(Matrix value, std::string name);
  static Tensor zeros(Index rows, Index cols);
  static Tensor scalar(double value);
  static Tensor row(const RowVector& value);

  bool defined() const { return node_ != nullptr; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }
  std::string shape_string() const;

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_parameter() const { return node_->is_parameter; }
  const std::string& name() const { return node_->name; }

  bool has_grad() const { return node_->grad.size() != 0; }
  // Gradient, or a zero grid of the value's shape when nothing flowed in.
  Matrix grad() const;
  // Gradient storage, allocated as zeros on first access.
  Matrix& grad_buffer();
  void zero_grad();
  void clear_grad() { node_->grad.resize(0, 0); }

  // Deep copy. Parameters stay parameters.
  Tensor clone() const;
  // Constant copy of the current value, cut from any tape.
  Tensor detach() const { return constant(node_->value); }

  TensorNode* node() const { return node_.get(); }
  bool same_as(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;
};

}  // namespace tgsl::ad
