#include "mlin/optimizer.hpp"

#include <cmath>

namespace mlin {

Adamax::Adamax(std::vector<Tensor> params, LrSchedule schedule, double beta1,
               double beta2, double epsilon)
    : params_(std::move(params)),
      schedule_(schedule),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {
  moment_.reserve(params_.size());
  inf_norm_.reserve(params_.size());
  for (const Tensor& p : params_) {
    moment_.emplace_back(p.size(), 0.0);
    inf_norm_.emplace_back(p.size(), 0.0);
  }
}

void Adamax::step(std::size_t epoch) {
  ++steps_;
  beta1_power_ *= beta1_;
  const double lr = schedule_.at(steps_, epoch);
  last_lr_ = lr;
  const double corrected_lr = lr / (1.0 - beta1_power_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    const bool has_grad = p.has_grad();
    const double* g = has_grad ? p.grad().data() : nullptr;
    double* m = moment_[i].data();
    double* u = inf_norm_[i].data();
    auto values = p.mutable_values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double gj = has_grad ? g[j] : 0.0;
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
      u[j] = std::max(beta2_ * u[j], std::fabs(gj));
      values[j] -= corrected_lr * m[j] / (u[j] + epsilon_);
    }
  }
}

void Adamax::zero_grad() {
  for (const Tensor& p : params_) p.zero_grad();
}

double clip_gradients(std::span<const Tensor> params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (const Tensor& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.grad_buffer()) g *= factor;
    }
  }
  return norm;
}

}  // namespace mlin
