#include "mlin/tensor.hpp"

#include <cmath>
#include <cstdio>

#include "mlin/error.hpp"

namespace mlin {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(shape[i]);
  }
  out += ']';
  return out;
}

namespace {
std::shared_ptr<detail::TensorStorage> make_storage(Shape shape,
                                                    std::vector<double> values) {
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw ShapeError("tensor extents must be positive, got " +
                       shape_str(shape));
    }
  }
  auto s = std::make_shared<detail::TensorStorage>();
  s->shape = std::move(shape);
  s->values = std::move(values);
  return s;
}
}  // namespace

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = shape_size(shape);
  Tensor t;
  t.s_ = make_storage(std::move(shape), std::vector<double>(n, 0.0));
  return t;
}

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_size(shape);
  Tensor t;
  t.s_ = make_storage(std::move(shape), std::vector<double>(n, value));
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  }
  Tensor t;
  t.s_ = make_storage(std::move(shape), std::move(values));
  return t;
}

double Tensor::value() const {
  if (size() != 1) {
    throw ShapeError("value() requires a single-element tensor, got " +
                     shape_str(shape()));
  }
  return s_->values[0];
}

std::vector<double>& Tensor::grad_buffer() const {
  if (s_->grad.empty()) s_->grad.assign(s_->values.size(), 0.0);
  return s_->grad;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff: shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    worst = std::max(worst, std::fabs(av[i] - bv[i]));
  }
  return worst;
}

bool allclose(const Tensor& a, const Tensor& b, double atol) {
  return max_abs_diff(a, b) <= atol;
}

}  // namespace mlin
