#include "mlin/tape.hpp"

#include "mlin/error.hpp"

namespace mlin {

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward requires a single-element loss, got " +
                     (loss.defined() ? shape_str(loss.shape()) : "undefined"));
  }
  loss.grad_buffer()[0] += 1.0;
  const int start = loss.node();
  if (start < 0) return;  // loss is a leaf; nothing upstream of it
  for (int i = start; i >= 0; --i) {
    const TapeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.output.has_grad()) continue;  // not on a path to the loss
    node.backward();
  }
}

}  // namespace mlin
