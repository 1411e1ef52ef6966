#include "vfer/models/model.hpp"

#include "vfer/core/errors.hpp"
#include "vfer/core/random.hpp"
#include "vfer/dataio/image.hpp"

namespace vfer::models {

ModelBundle::ModelBundle(BackboneConfig backbone, TemporalHeadConfig head, std::uint64_t seed)
    : backbone_config_(std::move(backbone)), head_config_(head) {
  backbone_config_.validate();
  head_config_.validate();
  backbone_ = make_backbone(backbone_config_);
  head_ = make_head(head_config_, backbone_->feature_dim());
  Rng rng(seed);
  backbone_->init(rng);
  head_->init(rng);
}

std::string ModelBundle::canonical_config() const {
  return models::canonical_config(backbone_config_, head_config_);
}

std::string ModelBundle::fingerprint() const { return fingerprint_of(canonical_config()); }

Tensor ModelBundle::extract_features(const Tensor& frames, bool training) {
  constexpr auto kSize = dataio::kFrameSize;
  if (frames.rank() != 5 || frames.dim(2) != kSize || frames.dim(3) != kSize || frames.dim(4) != 3) {
    throw InvalidInputError("expected (B, T, 112, 112, 3) frames, got " + shape_string(frames.shape()));
  }
  const std::size_t batch = frames.dim(0);
  const std::size_t steps = frames.dim(1);
  if (batch == 0 || steps == 0) throw InvalidInputError("empty batch or window");
  const std::size_t n = batch * steps;
  const std::size_t area = kSize * kSize;

  // HWC -> CHW
  Tensor chw({n, 3, kSize, kSize});
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = frames.data() + i * area * 3;
    double* dst = chw.data() + i * area * 3;
    for (std::size_t p = 0; p < area; ++p) {
      dst[p] = src[3 * p];
      dst[area + p] = src[3 * p + 1];
      dst[2 * area + p] = src[3 * p + 2];
    }
  }
  frames_shape_ = frames.shape();
  Tensor features = backbone_->forward(chw, training);
  features.reshape({batch, steps, backbone_->feature_dim()});
  return features;
}

Tensor ModelBundle::classify(const Tensor& features, bool training) {
  backbone_in_graph_ = false;
  return head_->forward(features, training);
}

Tensor ModelBundle::forward(const Tensor& frames, bool training) {
  Tensor features = extract_features(frames, training);
  Tensor logits = head_->forward(features, training);
  backbone_in_graph_ = true;
  return logits;
}

void ModelBundle::backward(const Tensor& dlogits) {
  Tensor dfeatures = head_->backward(dlogits);
  if (!backbone_in_graph_) return;
  dfeatures.reshape({dfeatures.dim(0) * dfeatures.dim(1), dfeatures.dim(2)});
  backbone_->backward(dfeatures);
}

ParameterList ModelBundle::parameters() {
  ParameterList out;
  ParameterList local;
  backbone_->collect(local);
  for (auto& p : local) out.push_back({"backbone." + p.name, p.param});
  local.clear();
  head_->collect(local);
  for (auto& p : local) out.push_back({"head." + p.name, p.param});
  return out;
}

ParameterList ModelBundle::backbone_parameters() {
  ParameterList out;
  backbone_->collect(out);
  return out;
}

void ModelBundle::zero_grad() {
  for (auto& p : parameters()) p.param->zero_grad();
}

}  // namespace vfer::models
