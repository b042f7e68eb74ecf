#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mlin/tensor.hpp"

namespace mlin {

struct TapeNode {
  Tensor output;
  std::vector<Tensor> inputs;
  std::function<void()> backward;  // pulls output.grad, accumulates into inputs
};

/// Dynamic reverse-mode tape, rebuilt per forward pass. Operations record
/// nodes in execution order, so the node list is already topologically
/// sorted and replaying it in reverse visits every consumer before its
/// producers. A tape and the tensors recorded on it belong to one thread.
class Tape {
 public:
  Tape() = default;
  explicit Tape(bool recording) : recording_(recording) {}

  bool recording() const { return recording_; }

  template <typename Fn>
  void record(Tensor output, std::vector<Tensor> inputs, Fn&& backward) {
    if (!recording_) return;
    output.set_node(static_cast<int>(nodes_.size()));
    nodes_.push_back(TapeNode{std::move(output), std::move(inputs),
                              std::function<void()>(std::forward<Fn>(backward))});
  }

  /// Seeds d(loss)/d(loss) = 1 and replays every recorded rule in reverse.
  /// Gradients add onto whatever is already accumulated, so calling this
  /// once per sample sums a batch gradient; callers zero parameter
  /// gradients between optimization steps. loss must be a single element.
  void backward(const Tensor& loss);

  const std::vector<TapeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  std::vector<TapeNode> nodes_;
  bool recording_ = true;
};

}  // namespace mlin
