#include "vfer/models/backbone.hpp"

#include "vfer/core/errors.hpp"
#include "vfer/dataio/image.hpp"

namespace vfer::models {

namespace {

constexpr std::size_t kTinyChannels1 = 8;
constexpr std::size_t kTinyChannels2 = 16;
constexpr std::size_t kTinyChannels3 = 16;
constexpr std::size_t kTinyGrid = 7;

void require_frames(const Tensor& frames) {
  constexpr auto kSize = dataio::kFrameSize;
  if (frames.rank() != 4 || frames.dim(1) != 3 || frames.dim(2) != kSize || frames.dim(3) != kSize) {
    throw InvalidInputError("backbone expects (N, 3, 112, 112) frames, got " + shape_string(frames.shape()));
  }
}

}  // namespace

std::unique_ptr<Backbone> make_backbone(const BackboneConfig& config) {
  config.validate();
  if (config.architecture == BackboneArch::ResNet50) return std::make_unique<ResNet50Backbone>();
  return std::make_unique<TinyBackbone>(config.feature_dim);
}

// ---------------------------------------------------------------- TinyBackbone

TinyBackbone::TinyBackbone(std::size_t feature_dim)
    : feature_dim_(feature_dim),
      conv1_(3, kTinyChannels1, 4, 4, 0, true),
      conv2_(kTinyChannels1, kTinyChannels2, 3, 2, 1, true),
      conv3_(kTinyChannels2, kTinyChannels3, 3, 2, 1, true),
      proj_(kTinyChannels3 * kTinyGrid * kTinyGrid, feature_dim, /*rowwise=*/true) {}

void TinyBackbone::init(Rng& rng) {
  conv1_.init(rng);
  conv2_.init(rng);
  conv3_.init(rng);
  proj_.init(rng);
}

Tensor TinyBackbone::forward(const Tensor& frames, bool /*training*/) {
  require_frames(frames);
  Tensor h = relu3_.forward(conv3_.forward(relu2_.forward(conv2_.forward(relu1_.forward(conv1_.forward(frames))))));
  flat_input_shape_ = h.shape();
  h.reshape({h.dim(0), h.size() / h.dim(0)});
  return proj_.forward(h);
}

void TinyBackbone::backward(const Tensor& dfeatures) {
  Tensor d = proj_.backward(dfeatures);
  d.reshape(flat_input_shape_);
  d = conv3_.backward(relu3_.backward(d));
  d = conv2_.backward(relu2_.backward(d));
  conv1_.backward(relu1_.backward(d), /*need_input_grad=*/false);
}

void TinyBackbone::collect(ParameterList& out) {
  conv1_.collect("conv1", out);
  conv2_.collect("conv2", out);
  conv3_.collect("conv3", out);
  proj_.collect("proj", out);
}

// ---------------------------------------------------------------- Bottleneck

Bottleneck::Bottleneck(std::size_t in_channels, std::size_t planes, std::size_t stride)
    : conv1_(in_channels, planes, 1, 1, 0, false), bn1_(planes),
      conv2_(planes, planes, 3, stride, 1, false), bn2_(planes),
      conv3_(planes, planes * 4, 1, 1, 0, false), bn3_(planes * 4) {
  if (stride != 1 || in_channels != planes * 4) {
    down_conv_ = std::make_unique<Conv2d>(in_channels, planes * 4, 1, stride, 0, false);
    down_bn_ = std::make_unique<BatchNorm2d>(planes * 4);
  }
}

void Bottleneck::init(Rng& rng) {
  conv1_.init(rng);
  conv2_.init(rng);
  conv3_.init(rng);
  bn1_.init();
  bn2_.init();
  bn3_.init();
  if (down_conv_) {
    down_conv_->init(rng);
    down_bn_->init();
  }
}

Tensor Bottleneck::forward(const Tensor& x, bool training) {
  Tensor h = relu1_.forward(bn1_.forward(conv1_.forward(x), training));
  h = relu2_.forward(bn2_.forward(conv2_.forward(h), training));
  h = bn3_.forward(conv3_.forward(h), training);
  if (down_conv_) {
    const Tensor identity = down_bn_->forward(down_conv_->forward(x), training);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += identity[i];
  } else {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += x[i];
  }
  return relu_out_.forward(h);
}

Tensor Bottleneck::backward(const Tensor& dy) {
  const Tensor d = relu_out_.backward(dy);
  Tensor dx = conv3_.backward(bn3_.backward(d));
  dx = conv2_.backward(bn2_.backward(relu2_.backward(dx)));
  dx = conv1_.backward(bn1_.backward(relu1_.backward(dx)));
  const Tensor didentity = down_conv_ ? down_conv_->backward(down_bn_->backward(d)) : d;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += didentity[i];
  return dx;
}

void Bottleneck::collect(const std::string& prefix, ParameterList& out) {
  conv1_.collect(join_name(prefix, "conv1"), out);
  bn1_.collect(join_name(prefix, "bn1"), out);
  conv2_.collect(join_name(prefix, "conv2"), out);
  bn2_.collect(join_name(prefix, "bn2"), out);
  conv3_.collect(join_name(prefix, "conv3"), out);
  bn3_.collect(join_name(prefix, "bn3"), out);
  if (down_conv_) {
    down_conv_->collect(join_name(prefix, "downsample.0"), out);
    down_bn_->collect(join_name(prefix, "downsample.1"), out);
  }
}

// ---------------------------------------------------------------- ResNet50Backbone

ResNet50Backbone::ResNet50Backbone() : conv1_(3, 64, 7, 2, 3, false), bn1_(64), pool_(3, 2, 1) {
  constexpr std::size_t kBlocks[4] = {3, 4, 6, 3};
  constexpr std::size_t kPlanes[4] = {64, 128, 256, 512};
  std::size_t in_channels = 64;
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<Bottleneck> stage;
    stage.reserve(kBlocks[s]);
    for (std::size_t b = 0; b < kBlocks[s]; ++b) {
      const std::size_t stride = (b == 0 && s > 0) ? 2 : 1;
      stage.emplace_back(in_channels, kPlanes[s], stride);
      in_channels = kPlanes[s] * 4;
    }
    stages_.push_back(std::move(stage));
  }
}

void ResNet50Backbone::init(Rng& rng) {
  conv1_.init(rng);
  bn1_.init();
  for (auto& stage : stages_) {
    for (auto& block : stage) block.init(rng);
  }
}

Tensor ResNet50Backbone::forward(const Tensor& frames, bool training) {
  require_frames(frames);
  Tensor h = pool_.forward(relu_.forward(bn1_.forward(conv1_.forward(frames), training)));
  for (auto& stage : stages_) {
    for (auto& block : stage) h = block.forward(h, training);
  }
  return avgpool_.forward(h);
}

void ResNet50Backbone::backward(const Tensor& dfeatures) {
  Tensor d = avgpool_.backward(dfeatures);
  for (auto stage = stages_.rbegin(); stage != stages_.rend(); ++stage) {
    for (auto block = stage->rbegin(); block != stage->rend(); ++block) d = block->backward(d);
  }
  d = bn1_.backward(relu_.backward(pool_.backward(d)));
  conv1_.backward(d, /*need_input_grad=*/false);
}

void ResNet50Backbone::collect(ParameterList& out) {
  conv1_.collect("conv1", out);
  bn1_.collect("bn1", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect("layer" + std::to_string(s + 1) + "." + std::to_string(b), out);
    }
  }
}

}  // namespace vfer::models
