#pragma once

#include <string>
#include <vector>

#include "mlin/dataset.hpp"
#include "mlin/model.hpp"

namespace mlin {

struct GradCheckGroup {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;  // one per named parameter tensor
  double worst = 0.0;

  bool passed(double tol) const { return worst < tol; }
};

/// Central-difference check of d(loss)/dθ against the tape for every
/// parameter group, on one sample with dropout disabled. The relative error
/// per scalar is |analytic - numeric| / max(|analytic|, |numeric|, 1e-3),
/// which degrades to an absolute 1e-3-scaled test where both gradients
/// vanish.
GradCheckReport gradient_check(MlinModel& model, const Sample& sample,
                               double eps);

/// Loss of one sample in evaluation mode (no recording, no dropout).
double sample_loss(const MlinModel& model, const Sample& sample);

}  // namespace mlin
