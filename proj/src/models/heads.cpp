#include "vfer/models/heads.hpp"

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"
#include "vfer/models/positional_encoding.hpp"

namespace vfer::models {

namespace {

void require_features(const Tensor& x, std::size_t dim) {
  if (x.rank() != 3 || x.dim(2) != dim) {
    throw InvalidInputError("head expects (B, T, " + std::to_string(dim) + ") features, got " + shape_string(x.shape()));
  }
  if (x.dim(0) == 0 || x.dim(1) == 0) throw InvalidInputError("head input has an empty batch or time axis");
  if (!x.all_finite()) throw InvalidInputError("head input contains non-finite features");
}

}  // namespace

std::unique_ptr<Head> make_head(const TemporalHeadConfig& config, std::size_t feature_dim) {
  config.validate();
  switch (config.kind) {
    case HeadKind::Static: return std::make_unique<StaticHead>(feature_dim);
    case HeadKind::Gru: return std::make_unique<GruHead>(feature_dim, config);
    case HeadKind::Transformer: return std::make_unique<TransformerHead>(feature_dim, config);
  }
  throw ConfigError("unknown head kind");
}

// ---------------------------------------------------------------- StaticHead

StaticHead::StaticHead(std::size_t feature_dim) : classifier(feature_dim, kNumClasses) {}

Tensor StaticHead::forward(const Tensor& features, bool /*training*/) {
  require_features(features, classifier.in_features());
  return classifier.forward(features);
}

// ---------------------------------------------------------------- GruHead

GruHead::GruHead(std::size_t feature_dim, const TemporalHeadConfig& config)
    : classifier(config.gru_hidden, kNumClasses) {
  for (std::size_t l = 0; l < config.gru_layers; ++l) {
    layers.emplace_back(l == 0 ? feature_dim : config.gru_hidden, config.gru_hidden);
    if (l + 1 < config.gru_layers) dropouts_.emplace_back(config.dropout);
  }
}

void GruHead::init(Rng& rng) {
  for (auto& layer : layers) layer.init(rng);
  classifier.init(rng);
}

void GruHead::reseed(std::uint64_t seed) {
  for (std::size_t i = 0; i < dropouts_.size(); ++i) dropouts_[i].reseed(derive_seed(seed, i));
}

Tensor GruHead::forward(const Tensor& features, bool training) {
  require_features(features, layers.front().input_size());
  Tensor h = features;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = layers[l].forward(h);
    if (l < dropouts_.size()) h = dropouts_[l].forward(h, training);
  }
  return classifier.forward(h);
}

Tensor GruHead::backward(const Tensor& dlogits) {
  Tensor d = classifier.backward(dlogits);
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l < dropouts_.size()) d = dropouts_[l].backward(d);
    d = layers[l].backward(d);
  }
  return d;
}

void GruHead::collect(ParameterList& out) {
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].collect("gru." + std::to_string(l), out);
  classifier.collect("classifier", out);
}

// ---------------------------------------------------------------- TransformerHead

TransformerHead::TransformerHead(std::size_t feature_dim, const TemporalHeadConfig& config)
    : input_proj(feature_dim, config.tf_model_dim), final_norm(config.tf_model_dim),
      classifier(config.tf_model_dim, kNumClasses), model_dim_(config.tf_model_dim), input_dropout_(config.dropout) {
  for (std::size_t l = 0; l < config.tf_layers; ++l) {
    layers.emplace_back(config.tf_model_dim, config.tf_heads, config.tf_ffn_dim, config.dropout);
  }
}

void TransformerHead::init(Rng& rng) {
  input_proj.init(rng);
  for (auto& layer : layers) layer.init(rng);
  final_norm.init();
  classifier.init(rng);
}

void TransformerHead::reseed(std::uint64_t seed) {
  input_dropout_.reseed(derive_seed(seed, 0));
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].reseed(derive_seed(seed, i + 1));
}

Tensor TransformerHead::forward(const Tensor& features, bool training) {
  require_features(features, input_proj.in_features());
  Tensor h = input_proj.forward(features);
  if (use_positions_) {
    const std::size_t batch = h.dim(0);
    const std::size_t steps = h.dim(1);
    const Tensor table = positional_encoding(steps, model_dim_);
    for (std::size_t b = 0; b < batch; ++b) {
      double* row = h.data() + b * steps * model_dim_;
      for (std::size_t i = 0; i < steps * model_dim_; ++i) row[i] += table[i];
    }
  }
  h = input_dropout_.forward(h, training);
  for (auto& layer : layers) h = layer.forward(h, training);
  return classifier.forward(final_norm.forward(h));
}

Tensor TransformerHead::backward(const Tensor& dlogits) {
  Tensor d = final_norm.backward(classifier.backward(dlogits));
  for (auto layer = layers.rbegin(); layer != layers.rend(); ++layer) d = layer->backward(d);
  return input_proj.backward(input_dropout_.backward(d));
}

void TransformerHead::collect(ParameterList& out) {
  input_proj.collect("input_proj", out);
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].collect("layers." + std::to_string(l), out);
  final_norm.collect("final_norm", out);
  classifier.collect("classifier", out);
}

}  // namespace vfer::models
