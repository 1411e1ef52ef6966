#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vfer/core/random.hpp"
#include "vfer/core/tensor.hpp"
#include "vfer/models/parameter.hpp"

namespace vfer::models {

// Every layer caches what its backward pass needs during forward(); a
// backward() call consumes the cache of the most recent forward().
// Parameter gradients accumulate until zero_grad().

// y = x W^T + b over the last axis.
class Linear {
 public:
  // With `rowwise`, each row is evaluated by its own matrix-vector product so
  // a row's result is bitwise independent of the other rows in the batch.
  Linear(std::size_t in_features, std::size_t out_features, bool rowwise = false);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy, bool need_input_grad = true);
  void collect(const std::string& prefix, ParameterList& out);

  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }

  Parameter weight;
  Parameter bias;

 private:
  std::size_t in_;
  std::size_t out_;
  bool rowwise_;
  Tensor input_;
};

// 2D convolution over (N, C, H, W) with square kernels. Each frame is
// processed independently.
class Conv2d {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         std::size_t padding, bool with_bias);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy, bool need_input_grad = true);
  void collect(const std::string& prefix, ParameterList& out);

  std::size_t output_extent(std::size_t input) const noexcept { return (input + 2 * padding_ - kernel_) / stride_ + 1; }

  Parameter weight;
  std::optional<Parameter> bias;

 private:
  void im2col(const double* frame, std::size_t height, std::size_t width, double* cols) const;
  void col2im(const double* cols, std::size_t height, std::size_t width, double* frame) const;
  bool is_pointwise() const noexcept { return kernel_ == 1 && stride_ == 1 && padding_ == 0; }

  std::size_t in_channels_;
  std::size_t out_channels_;
  std::size_t kernel_;
  std::size_t stride_;
  std::size_t padding_;
  Tensor input_;
};

// Per-channel batch normalization over (N, C, H, W).
class BatchNorm2d {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  void init();
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, ParameterList& out);

  Parameter weight;
  Parameter bias;
  Parameter running_mean;
  Parameter running_var;

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  bool trained_forward_ = false;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Tensor output_;
};

// Max pooling over (N, C, H, W); padded cells never win.
class MaxPool2d {
 public:
  MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t padding)
      : kernel_(kernel), stride_(stride), padding_(padding) {}

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  std::size_t kernel_;
  std::size_t stride_;
  std::size_t padding_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

// (N, C, H, W) -> (N, C)
class GlobalAvgPool {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  Shape input_shape_;
};

// Normalization over the last axis with learned scale and shift.
class LayerNorm {
 public:
  explicit LayerNorm(std::size_t features, double eps = 1e-5);

  void init();
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(const std::string& prefix, ParameterList& out);

  Parameter weight;
  Parameter bias;

 private:
  std::size_t features_;
  double eps_;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

// Inverted dropout. Identity outside training or when p == 0.
class Dropout {
 public:
  explicit Dropout(double p) : p_(p) {}

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy) const;

 private:
  double p_;
  Rng rng_{0};
  bool active_ = false;
  std::vector<double> mask_;
};

}  // namespace vfer::models
