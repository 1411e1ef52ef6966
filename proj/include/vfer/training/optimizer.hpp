#pragma once

#include <vector>

#include "vfer/core/tensor.hpp"
#include "vfer/models/parameter.hpp"

namespace vfer::training {

// SGD with heavy-ball momentum, no dampening or weight decay:
//   buf = momentum * buf + grad;  value -= lr * buf
// Buffers start at zero, so the first step uses the raw gradient.
// Non-trainable parameters are ignored.
class SgdMomentum {
 public:
  SgdMomentum(models::ParameterList params, double momentum);

  void step(double lr);

  const models::ParameterList& parameters() const noexcept { return params_; }
  double momentum() const noexcept { return momentum_; }
  // One buffer per entry of parameters(), same order.
  std::vector<Tensor>& buffers() noexcept { return buffers_; }
  const std::vector<Tensor>& buffers() const noexcept { return buffers_; }

 private:
  models::ParameterList params_;
  double momentum_;
  std::vector<Tensor> buffers_;
};

}  // namespace vfer::training
