#pragma once

#include <cstddef>
#include <span>

#include "vfer/core/tensor.hpp"

namespace vfer::training {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d value / d logits, same shape as the logits
  std::size_t valid_frames = 0;
};

// Mean negative log-likelihood over frames whose label is a class code;
// Invalid (-1) frames contribute neither value nor gradient.
// logits: (B, T, 7); labels: B*T codes in row-major (b, t) order.
// Throws NoValidTargetError when no frame carries a valid label.
LossResult masked_cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace vfer::training
