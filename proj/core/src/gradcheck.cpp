#include "mlin/gradcheck.hpp"

#include <cmath>

namespace mlin {

double sample_loss(const MlinModel& model, const Sample& sample) {
  Tape tape(false);
  ForwardResult out =
      forward(tape, model, sample.regions, sample.words, nullptr);
  return cross_entropy(tape, out.logits, sample.label).value();
}

GradCheckReport gradient_check(MlinModel& model, const Sample& sample,
                               double eps) {
  auto named = model.named_parameters();
  for (auto& [name, param] : named) param.zero_grad();

  {
    Tape tape;
    ForwardResult out =
        forward(tape, model, sample.regions, sample.words, nullptr);
    tape.backward(cross_entropy(tape, out.logits, sample.label));
  }

  GradCheckReport report;
  for (auto& [name, param] : named) {
    GradCheckGroup group;
    group.name = name;
    auto values = param.mutable_values();
    const std::vector<double>& analytic = param.grad_buffer();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + eps;
      const double loss_hi = sample_loss(model, sample);
      values[j] = saved - eps;
      const double loss_lo = sample_loss(model, sample);
      values[j] = saved;
      const double numeric = (loss_hi - loss_lo) / (2.0 * eps);
      const double denom =
          std::max({std::fabs(analytic[j]), std::fabs(numeric), 1e-3});
      group.max_rel_err =
          std::max(group.max_rel_err, std::fabs(analytic[j] - numeric) / denom);
    }
    report.worst = std::max(report.worst, group.max_rel_err);
    report.groups.push_back(std::move(group));
  }
  for (auto& [name, param] : named) param.zero_grad();
  return report;
}

}  // namespace mlin
