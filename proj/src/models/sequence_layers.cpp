#include "vfer/models/sequence_layers.hpp"

#include <cmath>

#include "vfer/core/errors.hpp"
#include "vfer/core/numeric.hpp"

namespace vfer::models {

namespace {

using Stride = Eigen::OuterStride<>;
using StridedMap = Eigen::Map<MatrixRM, 0, Stride>;
using ConstStridedMap = Eigen::Map<const MatrixRM, 0, Stride>;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void require_sequence(const Tensor& x, std::size_t features, const char* layer) {
  if (x.rank() != 3 || x.dim(2) != features) {
    throw InvalidInputError(std::string(layer) + ": expected (B, T, " + std::to_string(features) + ") input, got " +
                            shape_string(x.shape()));
  }
  if (x.dim(0) == 0 || x.dim(1) == 0) throw InvalidInputError(std::string(layer) + ": empty batch or sequence");
}

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

// ---------------------------------------------------------------- GruLayer

GruLayer::GruLayer(std::size_t input_size, std::size_t hidden_size)
    : weight_ih({3 * hidden_size, input_size}), weight_hh({3 * hidden_size, hidden_size}), bias_ih({3 * hidden_size}),
      bias_hh({3 * hidden_size}), input_(input_size), hidden_(hidden_size) {}

void GruLayer::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (Parameter* p : {&weight_ih, &weight_hh, &bias_ih, &bias_hh}) {
    for (double& v : p->value.values()) v = rng.uniform(-bound, bound);
  }
}

Tensor GruLayer::forward(const Tensor& x) {
  require_sequence(x, input_, "GruLayer");
  const std::size_t batch = x.dim(0);
  const std::size_t steps = x.dim(1);
  const std::size_t h3 = 3 * hidden_;
  input_cache_ = x;

  MatrixRM xi = x.matrix(batch * steps, input_) * weight_ih.value.matrix(h3, input_).transpose();
  xi.rowwise() += ConstVectorMap(bias_ih.value.data(), idx(h3)).transpose();

  for (Tensor* t : {&reset_, &update_, &candidate_, &recurrent_new_, &prev_state_}) *t = Tensor({steps, batch, hidden_});
  Tensor out({batch, steps, hidden_});
  MatrixRM state = MatrixRM::Zero(idx(batch), idx(hidden_));
  MatrixRM hh(idx(batch), idx(h3));
  const auto whh = weight_hh.value.matrix(h3, hidden_);
  const auto bhh = ConstVectorMap(bias_hh.value.data(), idx(h3));

  for (std::size_t t = 0; t < steps; ++t) {
    hh.noalias() = state * whh.transpose();
    hh.rowwise() += bhh.transpose();
    const std::size_t slab = t * batch * hidden_;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto xrow = xi.row(idx(b * steps + t));
      for (std::size_t k = 0; k < hidden_; ++k) {
        const std::size_t i = slab + b * hidden_ + k;
        const double prev = state(idx(b), idx(k));
        const double r = sigmoid(xrow(idx(k)) + hh(idx(b), idx(k)));
        const double z = sigmoid(xrow(idx(hidden_ + k)) + hh(idx(b), idx(hidden_ + k)));
        const double hn = hh(idx(b), idx(2 * hidden_ + k));
        const double n = std::tanh(xrow(idx(2 * hidden_ + k)) + r * hn);
        reset_[i] = r;
        update_[i] = z;
        candidate_[i] = n;
        recurrent_new_[i] = hn;
        prev_state_[i] = prev;
        const double next = (1.0 - z) * n + z * prev;
        state(idx(b), idx(k)) = next;
        out[(b * steps + t) * hidden_ + k] = next;
      }
    }
  }
  return out;
}

Tensor GruLayer::backward(const Tensor& dh) {
  const std::size_t batch = input_cache_.dim(0);
  const std::size_t steps = input_cache_.dim(1);
  const std::size_t h3 = 3 * hidden_;
  if (dh.shape() != Shape{batch, steps, hidden_}) throw InvalidInputError("GruLayer: gradient shape mismatch");

  MatrixRM dxi(idx(batch * steps), idx(h3));
  MatrixRM dhh(idx(batch), idx(h3));
  MatrixRM carry = MatrixRM::Zero(idx(batch), idx(hidden_));
  MatrixRM direct(idx(batch), idx(hidden_));
  const auto whh = weight_hh.value.matrix(h3, hidden_);
  auto dwhh = weight_hh.grad.matrix(h3, hidden_);
  auto dbhh = VectorMap(bias_hh.grad.data(), idx(h3));

  for (std::size_t step = steps; step-- > 0;) {
    const std::size_t slab = step * batch * hidden_;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t k = 0; k < hidden_; ++k) {
        const std::size_t i = slab + b * hidden_ + k;
        const double g = dh[(b * steps + step) * hidden_ + k] + carry(idx(b), idx(k));
        const double r = reset_[i];
        const double z = update_[i];
        const double n = candidate_[i];
        const double dn_pre = g * (1.0 - z) * (1.0 - n * n);
        const double dz_pre = g * (prev_state_[i] - n) * z * (1.0 - z);
        const double dr_pre = dn_pre * recurrent_new_[i] * r * (1.0 - r);
        auto xrow = dxi.row(idx(b * steps + step));
        xrow(idx(k)) = dr_pre;
        xrow(idx(hidden_ + k)) = dz_pre;
        xrow(idx(2 * hidden_ + k)) = dn_pre;
        dhh(idx(b), idx(k)) = dr_pre;
        dhh(idx(b), idx(hidden_ + k)) = dz_pre;
        dhh(idx(b), idx(2 * hidden_ + k)) = dn_pre * r;
        direct(idx(b), idx(k)) = g * z;
      }
    }
    const ConstMatrixMap prev(prev_state_.data() + slab, idx(batch), idx(hidden_));
    dwhh.noalias() += dhh.transpose() * prev;
    dbhh += dhh.colwise().sum().transpose();
    carry = direct;
    carry.noalias() += dhh * whh;
  }

  const auto x = input_cache_.matrix(batch * steps, input_);
  weight_ih.grad.matrix(h3, input_).noalias() += dxi.transpose() * x;
  VectorMap(bias_ih.grad.data(), idx(h3)) += dxi.colwise().sum().transpose();
  Tensor dx({batch, steps, input_});
  dx.matrix(batch * steps, input_).noalias() = dxi * weight_ih.value.matrix(h3, input_);
  return dx;
}

void GruLayer::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "weight_ih"), &weight_ih});
  out.push_back({join_name(prefix, "weight_hh"), &weight_hh});
  out.push_back({join_name(prefix, "bias_ih"), &bias_ih});
  out.push_back({join_name(prefix, "bias_hh"), &bias_hh});
}

// ---------------------------------------------------------------- MultiHeadSelfAttention

MultiHeadSelfAttention::MultiHeadSelfAttention(std::size_t dim, std::size_t heads)
    : in_proj_weight({3 * dim, dim}), in_proj_bias({3 * dim}), out_proj(dim, dim), dim_(dim), heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention width " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
}

void MultiHeadSelfAttention::init(Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(4 * dim_));
  for (double& v : in_proj_weight.value.values()) v = rng.uniform(-bound, bound);
  in_proj_bias.value.set_zero();
  out_proj.init(rng);
  out_proj.bias.value.set_zero();
}

Tensor MultiHeadSelfAttention::forward(const Tensor& x) {
  require_sequence(x, dim_, "MultiHeadSelfAttention");
  const std::size_t batch = x.dim(0);
  const std::size_t steps = x.dim(1);
  const std::size_t head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  input_ = x;

  qkv_ = Tensor({batch * steps, 3 * dim_});
  auto qkv = qkv_.matrix(batch * steps, 3 * dim_);
  qkv.noalias() = x.matrix(batch * steps, dim_) * in_proj_weight.value.matrix(3 * dim_, dim_).transpose();
  qkv.rowwise() += ConstVectorMap(in_proj_bias.value.data(), idx(3 * dim_)).transpose();

  attention_ = Tensor({batch, heads_, steps, steps});
  Tensor concat({batch, steps, dim_});
  const Stride row_stride(idx(3 * dim_));
  for (std::size_t b = 0; b < batch; ++b) {
    const double* base = qkv_.data() + b * steps * 3 * dim_;
    for (std::size_t h = 0; h < heads_; ++h) {
      ConstStridedMap q(base + h * head_dim, idx(steps), idx(head_dim), row_stride);
      ConstStridedMap k(base + dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      ConstStridedMap v(base + 2 * dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      MatrixMap a(attention_.data() + (b * heads_ + h) * steps * steps, idx(steps), idx(steps));
      a.noalias() = (q * k.transpose()) * scale;
      for (std::size_t t = 0; t < steps; ++t) {
        softmax_inplace(std::span<double>(a.data() + t * steps, steps));
      }
      StridedMap o(concat.data() + b * steps * dim_ + h * head_dim, idx(steps), idx(head_dim), Stride(idx(dim_)));
      o.noalias() = a * v;
    }
  }
  return out_proj.forward(concat);
}

Tensor MultiHeadSelfAttention::backward(const Tensor& dy) {
  const std::size_t batch = input_.dim(0);
  const std::size_t steps = input_.dim(1);
  const std::size_t head_dim = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Tensor dconcat = out_proj.backward(dy);
  Tensor dqkv_t({batch * steps, 3 * dim_});
  const Stride row_stride(idx(3 * dim_));
  MatrixRM da(idx(steps), idx(steps));
  MatrixRM ds(idx(steps), idx(steps));
  for (std::size_t b = 0; b < batch; ++b) {
    const double* base = qkv_.data() + b * steps * 3 * dim_;
    double* dbase = dqkv_t.data() + b * steps * 3 * dim_;
    for (std::size_t h = 0; h < heads_; ++h) {
      ConstStridedMap q(base + h * head_dim, idx(steps), idx(head_dim), row_stride);
      ConstStridedMap k(base + dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      ConstStridedMap v(base + 2 * dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      StridedMap dq(dbase + h * head_dim, idx(steps), idx(head_dim), row_stride);
      StridedMap dk(dbase + dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      StridedMap dv(dbase + 2 * dim_ + h * head_dim, idx(steps), idx(head_dim), row_stride);
      ConstMatrixMap a(attention_.data() + (b * heads_ + h) * steps * steps, idx(steps), idx(steps));
      ConstStridedMap dout(dconcat.data() + b * steps * dim_ + h * head_dim, idx(steps), idx(head_dim),
                           Stride(idx(dim_)));

      da.noalias() = dout * v.transpose();
      dv.noalias() = a.transpose() * dout;
      for (std::size_t t = 0; t < steps; ++t) {
        const double dot = da.row(idx(t)).dot(a.row(idx(t)));
        ds.row(idx(t)) = a.row(idx(t)).cwiseProduct((da.row(idx(t)).array() - dot).matrix());
      }
      dq.noalias() = (ds * k) * scale;
      dk.noalias() = (ds.transpose() * q) * scale;
    }
  }

  const auto dqkv = dqkv_t.matrix(batch * steps, 3 * dim_);
  const auto x = input_.matrix(batch * steps, dim_);
  in_proj_weight.grad.matrix(3 * dim_, dim_).noalias() += dqkv.transpose() * x;
  VectorMap(in_proj_bias.grad.data(), idx(3 * dim_)) += dqkv.colwise().sum().transpose();
  Tensor dx({batch, steps, dim_});
  dx.matrix(batch * steps, dim_).noalias() = dqkv * in_proj_weight.value.matrix(3 * dim_, dim_);
  return dx;
}

void MultiHeadSelfAttention::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "in_proj_weight"), &in_proj_weight});
  out.push_back({join_name(prefix, "in_proj_bias"), &in_proj_bias});
  out_proj.collect(join_name(prefix, "out_proj"), out);
}

// ---------------------------------------------------------------- TransformerEncoderLayer

TransformerEncoderLayer::TransformerEncoderLayer(std::size_t dim, std::size_t heads, std::size_t ffn_dim,
                                                 double dropout)
    : norm1(dim), self_attn(dim, heads), norm2(dim), linear1(dim, ffn_dim), linear2(ffn_dim, dim),
      attn_dropout_(dropout), ffn_dropout_(dropout) {}

void TransformerEncoderLayer::init(Rng& rng) {
  norm1.init();
  self_attn.init(rng);
  norm2.init();
  linear1.init(rng);
  linear2.init(rng);
}

void TransformerEncoderLayer::reseed(std::uint64_t seed) {
  attn_dropout_.reseed(derive_seed(seed, 1));
  ffn_dropout_.reseed(derive_seed(seed, 2));
}

Tensor TransformerEncoderLayer::forward(const Tensor& x, bool training) {
  Tensor y = attn_dropout_.forward(self_attn.forward(norm1.forward(x)), training);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  Tensor f = ffn_dropout_.forward(linear2.forward(relu_.forward(linear1.forward(norm2.forward(y)))), training);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += y[i];
  return f;
}

Tensor TransformerEncoderLayer::backward(const Tensor& dy) {
  Tensor dmid = norm2.backward(linear1.backward(relu_.backward(linear2.backward(ffn_dropout_.backward(dy)))));
  for (std::size_t i = 0; i < dmid.size(); ++i) dmid[i] += dy[i];
  Tensor dx = norm1.backward(self_attn.backward(attn_dropout_.backward(dmid)));
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dmid[i];
  return dx;
}

void TransformerEncoderLayer::collect(const std::string& prefix, ParameterList& out) {
  norm1.collect(join_name(prefix, "norm1"), out);
  self_attn.collect(join_name(prefix, "self_attn"), out);
  norm2.collect(join_name(prefix, "norm2"), out);
  linear1.collect(join_name(prefix, "linear1"), out);
  linear2.collect(join_name(prefix, "linear2"), out);
}

}  // namespace vfer::models
