#pragma once

#include <string>
#include <vector>

#include "vfer/core/tensor.hpp"

namespace vfer::models {

// A learnable array and its gradient accumulator. Non-trainable entries
// (batch-norm running statistics) carry no gradient but are still persisted.
struct Parameter {
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  explicit Parameter(Shape shape, bool is_trainable = true)
      : value(shape), grad(is_trainable ? shape : Shape{0}), trainable(is_trainable) {}

  void zero_grad() noexcept {
    if (trainable) grad.set_zero();
  }
};

struct NamedParameter {
  std::string name;
  Parameter* param;
};

using ParameterList = std::vector<NamedParameter>;

inline std::string join_name(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

}  // namespace vfer::models
