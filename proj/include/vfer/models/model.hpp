#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "vfer/core/tensor.hpp"
#include "vfer/models/backbone.hpp"
#include "vfer/models/config.hpp"
#include "vfer/models/heads.hpp"
#include "vfer/models/parameter.hpp"

namespace vfer::models {

// One complete model of the ensemble: its own backbone plus one head.
// Parameter names are prefixed `backbone.` and `head.`.
class ModelBundle {
 public:
  ModelBundle(BackboneConfig backbone, TemporalHeadConfig head, std::uint64_t seed);

  const BackboneConfig& backbone_config() const noexcept { return backbone_config_; }
  const TemporalHeadConfig& head_config() const noexcept { return head_config_; }
  HeadKind kind() const noexcept { return head_config_.kind; }
  bool is_temporal() const noexcept { return head_config_.kind != HeadKind::Static; }

  std::string canonical_config() const;
  std::string fingerprint() const;

  // (B, T, 112, 112, 3) normalized frames -> (B, T, D)
  Tensor extract_features(const Tensor& frames, bool training = false);
  // (B, T, D) -> (B, T, 7)
  Tensor classify(const Tensor& features, bool training = false);
  // (B, T, 112, 112, 3) -> (B, T, 7)
  Tensor forward(const Tensor& frames, bool training = false);
  // Backpropagates through the last forward().
  void backward(const Tensor& dlogits);

  ParameterList parameters();
  ParameterList backbone_parameters();
  void zero_grad();
  void reseed_dropout(std::uint64_t seed) { head_->reseed(seed); }

  Backbone& backbone() noexcept { return *backbone_; }
  Head& head() noexcept { return *head_; }

 private:
  BackboneConfig backbone_config_;
  TemporalHeadConfig head_config_;
  std::unique_ptr<Backbone> backbone_;
  std::unique_ptr<Head> head_;
  Shape frames_shape_;
  bool backbone_in_graph_ = false;
};

}  // namespace vfer::models
