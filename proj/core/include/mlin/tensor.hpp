#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mlin {

/// Extents of a dense tensor, outermost first. An empty shape is a scalar.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);  // e.g. "[3x4]"

namespace detail {
struct TensorStorage {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a backward pass reaches it
  int node = -1;             // id on the recording tape, -1 for leaves
};
}  // namespace detail

/// Dense row-major tensor of 64-bit reals with an attached gradient slot.
///
/// Copies share storage, so a parameter tensor captured by an operation's
/// backward rule is the same object the optimizer updates. Gradients
/// accumulate additively across backward passes until zero_grad(); this is
/// what makes per-sample backward passes sum into a batch gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value) { return from({}, {value}); }

  bool defined() const { return s_ != nullptr; }
  const Shape& shape() const { return s_->shape; }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t size() const { return s_->values.size(); }
  std::size_t dim(std::size_t axis) const { return s_->shape[axis]; }
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }

  std::span<const double> values() const { return s_->values; }
  std::span<double> mutable_values() { return s_->values; }

  /// Scalar payload; requires size() == 1.
  double value() const;

  double at(std::size_t flat) const { return s_->values[flat]; }
  double& at(std::size_t flat) { return s_->values[flat]; }
  double at(std::size_t i, std::size_t j) const {
    return s_->values[i * cols() + j];
  }
  double& at(std::size_t i, std::size_t j) {
    return s_->values[i * cols() + j];
  }

  bool has_grad() const { return !s_->grad.empty(); }
  std::span<const double> grad() const { return s_->grad; }

  /// Gradient buffer, allocated as zeros on first use. Shared-state
  /// mutation: const because every copy of the tensor sees the same slot.
  std::vector<double>& grad_buffer() const;

  void zero_grad() const { s_->grad.clear(); }

  int node() const { return s_->node; }
  void set_node(int id) const { s_->node = id; }

  bool shares_storage(const Tensor& other) const { return s_ == other.s_; }

 private:
  std::shared_ptr<detail::TensorStorage> s_;
};

/// Max over elements of |a - b|; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

bool allclose(const Tensor& a, const Tensor& b, double atol);

}  // namespace mlin
