#pragma once

#include <cstddef>
#include <vector>

#include "mlin/tensor.hpp"

namespace mlin {

/// One training example: region features (M×d_in), word features (N×d_in)
/// and the answer class.
struct Sample {
  Tensor regions;
  Tensor words;
  std::size_t label = 0;
};

using Dataset = std::vector<Sample>;

}  // namespace mlin
