#pragma once

#include <string>
#include <vector>

#include "vfer/core/random.hpp"
#include "vfer/core/tensor.hpp"
#include "vfer/models/layers.hpp"
#include "vfer/models/parameter.hpp"

namespace vfer::models {

// One unidirectional GRU layer over (B, T, input) with zero initial state.
// Gate layout in the stacked weights is (reset, update, new):
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
class GruLayer {
 public:
  GruLayer(std::size_t input_size, std::size_t hidden_size);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dh);
  void collect(const std::string& prefix, ParameterList& out);

  std::size_t input_size() const noexcept { return input_; }
  std::size_t hidden_size() const noexcept { return hidden_; }

  Parameter weight_ih;
  Parameter weight_hh;
  Parameter bias_ih;
  Parameter bias_hh;

 private:
  std::size_t input_;
  std::size_t hidden_;
  Tensor input_cache_;
  // Per (b, t) rows: gates r, z, n, the recurrent candidate term
  // (W_hn h + b_hn), and the previous state.
  Tensor reset_, update_, candidate_, recurrent_new_, prev_state_;
};

// Unmasked multi-head scaled dot-product self-attention over (B, T, dim).
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention(std::size_t dim, std::size_t heads);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, ParameterList& out);

  // Attention weights of the last forward, shape (B, heads, T, T).
  const Tensor& attention() const noexcept { return attention_; }

  Parameter in_proj_weight;  // (3*dim, dim): query, key, value stacked
  Parameter in_proj_bias;
  Linear out_proj;

 private:
  std::size_t dim_;
  std::size_t heads_;
  Tensor input_;
  Tensor qkv_;
  Tensor attention_;
};

// Pre-normalization encoder block:
//   y = x + drop(attn(norm1(x)));  out = y + drop(ffn(norm2(y)))
// with ffn = linear2(relu(linear1(.))).
class TransformerEncoderLayer {
 public:
  TransformerEncoderLayer(std::size_t dim, std::size_t heads, std::size_t ffn_dim, double dropout);

  void init(Rng& rng);
  void reseed(std::uint64_t seed);
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, ParameterList& out);

  LayerNorm norm1;
  MultiHeadSelfAttention self_attn;
  LayerNorm norm2;
  Linear linear1;
  Linear linear2;

 private:
  Relu relu_;
  Dropout attn_dropout_;
  Dropout ffn_dropout_;
};

}  // namespace vfer::models
