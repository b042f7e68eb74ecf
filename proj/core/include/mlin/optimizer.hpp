#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlin/tensor.hpp"

namespace mlin {

/// Learning-rate schedule: linear warmup from 0 to base_lr over the first
/// warmup_steps updates, constant afterwards, dropped to decay_lr once the
/// decay epoch is reached.
struct LrSchedule {
  double base_lr = 0.005;
  std::size_t warmup_steps = 1000;
  double decay_lr = 0.0005;
  std::size_t decay_epoch = 7;

  /// step is the 1-based update count, epoch the 0-based epoch index.
  double at(std::size_t step, std::size_t epoch) const {
    if (epoch >= decay_epoch) return decay_lr;
    if (warmup_steps > 0 && step < warmup_steps) {
      return base_lr * static_cast<double>(step) /
             static_cast<double>(warmup_steps);
    }
    return base_lr;
  }
};

/// Adamax: first-moment and infinity-norm accumulators per parameter,
/// bias-corrected first moment, update θ -= lr/(1-β₁ᵗ) · m/(u+ε).
class Adamax {
 public:
  explicit Adamax(std::vector<Tensor> params, LrSchedule schedule = {},
                  double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8);

  /// One update from the gradients currently accumulated on the parameters;
  /// missing gradients count as zero.
  void step(std::size_t epoch);

  void zero_grad();

  std::size_t step_count() const { return steps_; }
  double last_lr() const { return last_lr_; }
  std::span<const Tensor> params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> moment_;
  std::vector<std::vector<double>> inf_norm_;
  LrSchedule schedule_;
  double beta1_, beta2_, epsilon_;
  double beta1_power_ = 1.0;
  std::size_t steps_ = 0;
  double last_lr_ = 0.0;
};

/// If the global L2 norm of all gradients exceeds max_norm, scales every
/// gradient by max_norm / norm. Returns the pre-clip norm.
double clip_gradients(std::span<const Tensor> params, double max_norm);

}  // namespace mlin
