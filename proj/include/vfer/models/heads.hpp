#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vfer/core/random.hpp"
#include "vfer/core/tensor.hpp"
#include "vfer/models/config.hpp"
#include "vfer/models/layers.hpp"
#include "vfer/models/parameter.hpp"
#include "vfer/models/sequence_layers.hpp"

namespace vfer::models {

// Maps (B, T, D) features to (B, T, 7) logits, one output per time step.
class Head {
 public:
  virtual ~Head() = default;

  virtual void init(Rng& rng) = 0;
  virtual Tensor forward(const Tensor& features, bool training) = 0;
  // Returns the gradient w.r.t. the features of the last forward.
  virtual Tensor backward(const Tensor& dlogits) = 0;
  virtual void collect(ParameterList& out) = 0;
  virtual void reseed(std::uint64_t /*seed*/) {}
};

std::unique_ptr<Head> make_head(const TemporalHeadConfig& config, std::size_t feature_dim);

// Single affine map applied to each frame independently.
class StaticHead final : public Head {
 public:
  explicit StaticHead(std::size_t feature_dim);

  void init(Rng& rng) override { classifier.init(rng); }
  Tensor forward(const Tensor& features, bool training) override;
  Tensor backward(const Tensor& dlogits) override { return classifier.backward(dlogits); }
  void collect(ParameterList& out) override { classifier.collect("classifier", out); }

  Linear classifier;
};

// Stacked unidirectional GRU layers followed by a per-step classifier.
class GruHead final : public Head {
 public:
  GruHead(std::size_t feature_dim, const TemporalHeadConfig& config);

  void init(Rng& rng) override;
  Tensor forward(const Tensor& features, bool training) override;
  Tensor backward(const Tensor& dlogits) override;
  void collect(ParameterList& out) override;
  void reseed(std::uint64_t seed) override;

  std::vector<GruLayer> layers;
  Linear classifier;

 private:
  std::vector<Dropout> dropouts_;  // between stacked layers
};

// Projection to the model width, fixed sinusoidal positions, pre-norm
// encoder blocks, final LayerNorm, per-step classifier. Attention is
// unmasked.
class TransformerHead final : public Head {
 public:
  TransformerHead(std::size_t feature_dim, const TemporalHeadConfig& config);

  void init(Rng& rng) override;
  Tensor forward(const Tensor& features, bool training) override;
  Tensor backward(const Tensor& dlogits) override;
  void collect(ParameterList& out) override;
  void reseed(std::uint64_t seed) override;

  // Test hook: without positions the head is permutation-equivariant in T.
  void set_positional_encoding(bool enabled) noexcept { use_positions_ = enabled; }

  Linear input_proj;
  std::vector<TransformerEncoderLayer> layers;
  LayerNorm final_norm;
  Linear classifier;

 private:
  std::size_t model_dim_;
  bool use_positions_ = true;
  Dropout input_dropout_;
};

}  // namespace vfer::models
