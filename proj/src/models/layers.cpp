#include "vfer/models/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfer/core/errors.hpp"

namespace vfer::models {

namespace {

void uniform_fill(Tensor& t, Rng& rng, double bound) {
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

void require_rank(const Tensor& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    throw InvalidInputError(std::string(layer) + ": expected rank " + std::to_string(rank) + " input, got " +
                            shape_string(x.shape()));
  }
}

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(std::size_t in_features, std::size_t out_features, bool rowwise)
    : weight({out_features, in_features}), bias({out_features}), in_(in_features), out_(out_features),
      rowwise_(rowwise) {}

void Linear::init(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  uniform_fill(weight.value, rng, bound);
  uniform_fill(bias.value, rng, bound);
}

Tensor Linear::forward(const Tensor& x) {
  if (x.rank() == 0 || x.shape().back() != in_) {
    throw InvalidInputError("Linear: expected last axis " + std::to_string(in_) + ", got " + shape_string(x.shape()));
  }
  input_ = x;
  Shape out_shape = x.shape();
  out_shape.back() = out_;
  Tensor y(out_shape);
  const auto xs = x.as_rows();
  auto ys = y.as_rows();
  const auto w = weight.value.matrix(out_, in_);
  const auto b = ConstVectorMap(bias.value.data(), static_cast<Eigen::Index>(out_));
  if (rowwise_) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(out_));
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
      row.noalias() = w * xs.row(r).transpose();
      ys.row(r) = (row + b).transpose();
    }
  } else {
    ys.noalias() = xs * w.transpose();
    ys.rowwise() += b.transpose();
  }
  return y;
}

Tensor Linear::backward(const Tensor& dy, bool need_input_grad) {
  const auto dys = dy.as_rows();
  const auto xs = input_.as_rows();
  if (dys.rows() != xs.rows() || static_cast<std::size_t>(dys.cols()) != out_) {
    throw InvalidInputError("Linear: gradient shape does not match last forward");
  }
  weight.grad.matrix(out_, in_).noalias() += dys.transpose() * xs;
  VectorMap(bias.grad.data(), static_cast<Eigen::Index>(out_)) += dys.colwise().sum().transpose();
  if (!need_input_grad) return {};
  Tensor dx(input_.shape());
  dx.as_rows().noalias() = dys * weight.value.matrix(out_, in_);
  return dx;
}

void Linear::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "weight"), &weight});
  out.push_back({join_name(prefix, "bias"), &bias});
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
               std::size_t padding, bool with_bias)
    : weight({out_channels, in_channels, kernel, kernel}), in_channels_(in_channels), out_channels_(out_channels),
      kernel_(kernel), stride_(stride), padding_(padding) {
  if (with_bias) bias.emplace(Shape{out_channels});
}

void Conv2d::init(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels_ * kernel_ * kernel_);
  const double stddev = std::sqrt(2.0 / fan_in);
  for (double& v : weight.value.values()) v = stddev * rng.normal();
  if (bias) bias->value.set_zero();
}

void Conv2d::im2col(const double* frame, std::size_t height, std::size_t width, double* cols) const {
  const std::size_t oh = output_extent(height);
  const std::size_t ow = output_extent(width);
  const auto pad = static_cast<std::ptrdiff_t>(padding_);
  for (std::size_t c = 0; c < in_channels_; ++c) {
    const double* plane = frame + c * height * width;
    for (std::size_t ki = 0; ki < kernel_; ++ki) {
      for (std::size_t kj = 0; kj < kernel_; ++kj) {
        double* row = cols + ((c * kernel_ + ki) * kernel_ + kj) * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ki) - pad;
          double* out = row + oy * ow;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) {
            std::fill_n(out, ow, 0.0);
            continue;
          }
          const double* in_row = plane + static_cast<std::size_t>(iy) * width;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kj) - pad;
            out[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(width)) ? 0.0 : in_row[ix];
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const double* cols, std::size_t height, std::size_t width, double* frame) const {
  const std::size_t oh = output_extent(height);
  const std::size_t ow = output_extent(width);
  const auto pad = static_cast<std::ptrdiff_t>(padding_);
  std::fill_n(frame, in_channels_ * height * width, 0.0);
  for (std::size_t c = 0; c < in_channels_; ++c) {
    double* plane = frame + c * height * width;
    for (std::size_t ki = 0; ki < kernel_; ++ki) {
      for (std::size_t kj = 0; kj < kernel_; ++kj) {
        const double* row = cols + ((c * kernel_ + ki) * kernel_ + kj) * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ki) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(height)) continue;
          double* out_row = plane + static_cast<std::size_t>(iy) * width;
          const double* in = row + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kj) - pad;
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(width)) out_row[ix] += in[ox];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  require_rank(x, 4, "Conv2d");
  if (x.dim(1) != in_channels_) throw InvalidInputError("Conv2d: channel mismatch, got " + shape_string(x.shape()));
  const std::size_t n = x.dim(0);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  if (h + 2 * padding_ < kernel_ || w + 2 * padding_ < kernel_) throw InvalidInputError("Conv2d: input smaller than kernel");
  const std::size_t oh = output_extent(h);
  const std::size_t ow = output_extent(w);
  const std::size_t patch = in_channels_ * kernel_ * kernel_;
  input_ = x;

  Tensor y({n, out_channels_, oh, ow});
  const auto wm = weight.value.matrix(out_channels_, patch);
  MatrixRM cols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(oh * ow));
  for (std::size_t i = 0; i < n; ++i) {
    const double* frame = x.data() + i * in_channels_ * h * w;
    MatrixMap out(y.data() + i * out_channels_ * oh * ow, static_cast<Eigen::Index>(out_channels_),
                  static_cast<Eigen::Index>(oh * ow));
    if (is_pointwise()) {
      out.noalias() = wm * ConstMatrixMap(frame, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(oh * ow));
    } else {
      im2col(frame, h, w, cols.data());
      out.noalias() = wm * cols;
    }
    if (bias) out.colwise() += ConstVectorMap(bias->value.data(), static_cast<Eigen::Index>(out_channels_));
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, bool need_input_grad) {
  const std::size_t n = input_.dim(0);
  const std::size_t h = input_.dim(2);
  const std::size_t w = input_.dim(3);
  const std::size_t oh = output_extent(h);
  const std::size_t ow = output_extent(w);
  if (dy.shape() != Shape{n, out_channels_, oh, ow}) throw InvalidInputError("Conv2d: gradient shape mismatch");
  const std::size_t patch = in_channels_ * kernel_ * kernel_;
  const auto wm = weight.value.matrix(out_channels_, patch);
  auto dw = weight.grad.matrix(out_channels_, patch);

  Tensor dx;
  if (need_input_grad) dx = Tensor(input_.shape());
  MatrixRM cols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(oh * ow));
  MatrixRM dcols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(oh * ow));
  for (std::size_t i = 0; i < n; ++i) {
    const double* frame = input_.data() + i * in_channels_ * h * w;
    ConstMatrixMap g(dy.data() + i * out_channels_ * oh * ow, static_cast<Eigen::Index>(out_channels_),
                     static_cast<Eigen::Index>(oh * ow));
    if (bias) VectorMap(bias->grad.data(), static_cast<Eigen::Index>(out_channels_)) += g.rowwise().sum();
    if (is_pointwise()) {
      const ConstMatrixMap in(frame, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(oh * ow));
      dw.noalias() += g * in.transpose();
      if (need_input_grad) {
        MatrixMap(dx.data() + i * in_channels_ * h * w, static_cast<Eigen::Index>(patch),
                  static_cast<Eigen::Index>(oh * ow))
            .noalias() = wm.transpose() * g;
      }
    } else {
      im2col(frame, h, w, cols.data());
      dw.noalias() += g * cols.transpose();
      if (need_input_grad) {
        dcols.noalias() = wm.transpose() * g;
        col2im(dcols.data(), h, w, dx.data() + i * in_channels_ * h * w);
      }
    }
  }
  return dx;
}

void Conv2d::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "weight"), &weight});
  if (bias) out.push_back({join_name(prefix, "bias"), &*bias});
}

// ---------------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : weight({channels}), bias({channels}), running_mean({channels}, false), running_var({channels}, false),
      channels_(channels), eps_(eps), momentum_(momentum) {
  init();
}

void BatchNorm2d::init() {
  weight.value.fill(1.0);
  bias.value.set_zero();
  running_mean.value.set_zero();
  running_var.value.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  require_rank(x, 4, "BatchNorm2d");
  if (x.dim(1) != channels_) throw InvalidInputError("BatchNorm2d: channel mismatch");
  const std::size_t n = x.dim(0);
  const std::size_t plane = x.dim(2) * x.dim(3);
  const std::size_t count = n * plane;
  Tensor y(x.shape());
  trained_forward_ = training;
  inv_std_.assign(channels_, 0.0);
  if (training) normalized_ = Tensor(x.shape());

  for (std::size_t c = 0; c < channels_; ++c) {
    double mean;
    double var;
    if (training) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = x.data() + (i * channels_ + c) * plane;
        for (std::size_t k = 0; k < plane; ++k) sum += p[k];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = x.data() + (i * channels_ + c) * plane;
        for (std::size_t k = 0; k < plane; ++k) sq += (p[k] - mean) * (p[k] - mean);
      }
      var = sq / static_cast<double>(count);
      const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
      running_mean.value[c] = (1.0 - momentum_) * running_mean.value[c] + momentum_ * mean;
      running_var.value[c] = (1.0 - momentum_) * running_var.value[c] + momentum_ * unbiased;
    } else {
      mean = running_mean.value[c];
      var = running_var.value[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv_std;
    const double gamma = weight.value[c];
    const double beta = bias.value[c];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t base = (i * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        const double xhat = (x[base + k] - mean) * inv_std;
        if (training) normalized_[base + k] = xhat;
        y[base + k] = gamma * xhat + beta;
      }
    }
  }
  if (!training) normalized_ = x;  // eval backward needs x_hat, recomputed from x
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  if (dy.shape() != normalized_.shape()) throw InvalidInputError("BatchNorm2d: gradient shape mismatch");
  const std::size_t n = dy.dim(0);
  const std::size_t plane = dy.dim(2) * dy.dim(3);
  const auto count = static_cast<double>(n * plane);
  Tensor dx(dy.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    const double gamma = weight.value[c];
    const double inv_std = inv_std_[c];
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t base = (i * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        const double xhat = trained_forward_ ? normalized_[base + k]
                                             : (normalized_[base + k] - running_mean.value[c]) * inv_std;
        sum_dy += dy[base + k];
        sum_dy_xhat += dy[base + k] * xhat;
      }
    }
    weight.grad[c] += sum_dy_xhat;
    bias.grad[c] += sum_dy;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t base = (i * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        if (trained_forward_) {
          const double xhat = normalized_[base + k];
          dx[base + k] = gamma * inv_std / count * (count * dy[base + k] - sum_dy - xhat * sum_dy_xhat);
        } else {
          dx[base + k] = gamma * inv_std * dy[base + k];
        }
      }
    }
  }
  return dx;
}

void BatchNorm2d::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "weight"), &weight});
  out.push_back({join_name(prefix, "bias"), &bias});
  out.push_back({join_name(prefix, "running_mean"), &running_mean});
  out.push_back({join_name(prefix, "running_var"), &running_var});
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& x) {
  output_ = x;
  for (double& v : output_.values()) v = v > 0.0 ? v : 0.0;
  return output_;
}

Tensor Relu::backward(const Tensor& dy) const {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (output_[i] <= 0.0) dx[i] = 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------- MaxPool2d

Tensor MaxPool2d::forward(const Tensor& x) {
  require_rank(x, 4, "MaxPool2d");
  input_shape_ = x.shape();
  const std::size_t n = x.dim(0);
  const std::size_t c = x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  const std::size_t oh = (h + 2 * padding_ - kernel_) / stride_ + 1;
  const std::size_t ow = (w + 2 * padding_ - kernel_) / stride_ + 1;
  Tensor y({n, c, oh, ow});
  argmax_.assign(y.size(), 0);
  const auto pad = static_cast<std::ptrdiff_t>(padding_);
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = base;
        for (std::size_t ki = 0; ki < kernel_; ++ki) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ki) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kj = 0; kj < kernel_; ++kj) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kj) - pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            const std::size_t idx = base + static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix);
            if (x[idx] > best) {
              best = x[idx];
              best_idx = idx;
            }
          }
        }
        y[o] = best;
        argmax_[o] = best_idx;
      }
    }
  }
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) const {
  if (dy.size() != argmax_.size()) throw InvalidInputError("MaxPool2d: gradient shape mismatch");
  Tensor dx(input_shape_);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax_[o]] += dy[o];
  return dx;
}

// ---------------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x) {
  require_rank(x, 4, "GlobalAvgPool");
  input_shape_ = x.shape();
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t area = x.dim(2) * x.dim(3);
  Tensor y({x.dim(0), x.dim(1)});
  for (std::size_t p = 0; p < planes; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < area; ++k) sum += x[p * area + k];
    y[p] = sum / static_cast<double>(area);
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) const {
  Tensor dx(input_shape_);
  const std::size_t area = input_shape_[2] * input_shape_[3];
  for (std::size_t p = 0; p < dy.size(); ++p) {
    const double g = dy[p] / static_cast<double>(area);
    for (std::size_t k = 0; k < area; ++k) dx[p * area + k] = g;
  }
  return dx;
}

// ---------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(std::size_t features, double eps)
    : weight({features}), bias({features}), features_(features), eps_(eps) {
  init();
}

void LayerNorm::init() {
  weight.value.fill(1.0);
  bias.value.set_zero();
}

Tensor LayerNorm::forward(const Tensor& x) {
  if (x.rank() == 0 || x.shape().back() != features_) throw InvalidInputError("LayerNorm: feature size mismatch");
  const std::size_t rows = x.size() / features_;
  normalized_ = Tensor(x.shape());
  inv_std_.assign(rows, 0.0);
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * features_;
    double mean = 0.0;
    for (std::size_t k = 0; k < features_; ++k) mean += in[k];
    mean /= static_cast<double>(features_);
    double var = 0.0;
    for (std::size_t k = 0; k < features_; ++k) var += (in[k] - mean) * (in[k] - mean);
    var /= static_cast<double>(features_);
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[r] = inv_std;
    for (std::size_t k = 0; k < features_; ++k) {
      const double xhat = (in[k] - mean) * inv_std;
      normalized_[r * features_ + k] = xhat;
      y[r * features_ + k] = weight.value[k] * xhat + bias.value[k];
    }
  }
  return y;
}

Tensor LayerNorm::backward(const Tensor& dy) {
  if (dy.shape() != normalized_.shape()) throw InvalidInputError("LayerNorm: gradient shape mismatch");
  const std::size_t rows = dy.size() / features_;
  const auto d = static_cast<double>(features_);
  Tensor dx(dy.shape());
  std::vector<double> dxhat(features_);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t k = 0; k < features_; ++k) {
      const std::size_t i = r * features_ + k;
      weight.grad[k] += dy[i] * normalized_[i];
      bias.grad[k] += dy[i];
      dxhat[k] = dy[i] * weight.value[k];
      mean_dxhat += dxhat[k];
      mean_dxhat_xhat += dxhat[k] * normalized_[i];
    }
    mean_dxhat /= d;
    mean_dxhat_xhat /= d;
    for (std::size_t k = 0; k < features_; ++k) {
      const std::size_t i = r * features_ + k;
      dx[i] = inv_std_[r] * (dxhat[k] - mean_dxhat - normalized_[i] * mean_dxhat_xhat);
    }
  }
  return dx;
}

void LayerNorm::collect(const std::string& prefix, ParameterList& out) {
  out.push_back({join_name(prefix, "weight"), &weight});
  out.push_back({join_name(prefix, "bias"), &bias});
}

// ---------------------------------------------------------------- Dropout

Tensor Dropout::forward(const Tensor& x, bool training) {
  active_ = training && p_ > 0.0;
  if (!active_) return x;
  const double keep = 1.0 - p_;
  mask_.resize(x.size());
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mask_[i] = rng_.uniform() < keep ? 1.0 / keep : 0.0;
    y[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& dy) const {
  if (!active_) return dy;
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  return dx;
}

}  // namespace vfer::models
