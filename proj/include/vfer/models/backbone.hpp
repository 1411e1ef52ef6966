#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vfer/core/random.hpp"
#include "vfer/core/tensor.hpp"
#include "vfer/models/config.hpp"
#include "vfer/models/layers.hpp"
#include "vfer/models/parameter.hpp"

namespace vfer::models {

// Maps (N, 3, 112, 112) frames to (N, D) features. Each frame's features
// depend only on that frame whenever batch statistics are not in use
// (always for the tiny backbone; in evaluation mode for ResNet50).
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::size_t feature_dim() const noexcept = 0;
  virtual void init(Rng& rng) = 0;
  virtual Tensor forward(const Tensor& frames, bool training) = 0;
  // Accumulates parameter gradients; no gradient w.r.t. the pixels.
  virtual void backward(const Tensor& dfeatures) = 0;
  // Names follow the torchvision layout so converted face-recognition
  // checkpoints map one to one.
  virtual void collect(ParameterList& out) = 0;
};

std::unique_ptr<Backbone> make_backbone(const BackboneConfig& config);

// conv(3->8, k4 s4) relu conv(8->16, k3 s2) relu conv(16->16, k3 s2) relu
// flatten(16x7x7) linear(784->D)
class TinyBackbone final : public Backbone {
 public:
  explicit TinyBackbone(std::size_t feature_dim);

  std::size_t feature_dim() const noexcept override { return feature_dim_; }
  void init(Rng& rng) override;
  Tensor forward(const Tensor& frames, bool training) override;
  void backward(const Tensor& dfeatures) override;
  void collect(ParameterList& out) override;

 private:
  std::size_t feature_dim_;
  Conv2d conv1_, conv2_, conv3_;
  Relu relu1_, relu2_, relu3_;
  Linear proj_;
  Shape flat_input_shape_;
};

class Bottleneck {
 public:
  Bottleneck(std::size_t in_channels, std::size_t planes, std::size_t stride);

  void init(Rng& rng);
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, ParameterList& out);

 private:
  Conv2d conv1_;
  BatchNorm2d bn1_;
  Conv2d conv2_;
  BatchNorm2d bn2_;
  Conv2d conv3_;
  BatchNorm2d bn3_;
  std::unique_ptr<Conv2d> down_conv_;
  std::unique_ptr<BatchNorm2d> down_bn_;
  Relu relu1_, relu2_, relu_out_;
};

// ResNet-50 (stride on the 3x3 convolution of each bottleneck), global
// average pooled to 2048 features. No classifier layer.
class ResNet50Backbone final : public Backbone {
 public:
  ResNet50Backbone();

  std::size_t feature_dim() const noexcept override { return 2048; }
  void init(Rng& rng) override;
  Tensor forward(const Tensor& frames, bool training) override;
  void backward(const Tensor& dfeatures) override;
  void collect(ParameterList& out) override;

 private:
  Conv2d conv1_;
  BatchNorm2d bn1_;
  Relu relu_;
  MaxPool2d pool_;
  std::vector<std::vector<Bottleneck>> stages_;
  GlobalAvgPool avgpool_;
};

}  // namespace vfer::models
