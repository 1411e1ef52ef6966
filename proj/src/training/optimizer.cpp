#include "vfer/training/optimizer.hpp"

namespace vfer::training {

SgdMomentum::SgdMomentum(models::ParameterList params, double momentum) : momentum_(momentum) {
  for (auto& p : params) {
    if (!p.param->trainable) continue;
    buffers_.emplace_back(p.param->value.shape());
    params_.push_back(p);
  }
}

void SgdMomentum::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i].param;
    const std::size_t n = p.value.size();
    double* buf = buffers_[i].data();
    double* value = p.value.data();
    const double* grad = p.grad.data();
    for (std::size_t k = 0; k < n; ++k) {
      buf[k] = momentum_ * buf[k] + grad[k];
      value[k] -= lr * buf[k];
    }
  }
}

}  // namespace vfer::training
