#include "vfer/training/train_config.hpp"

#include <cmath>
#include <cstdio>

#include "vfer/core/errors.hpp"

namespace vfer::training {

namespace {
std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void TrainConfig::validate() const {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ConfigError("train.base_lr must be positive");
  if (epochs == 0) throw ConfigError("train.epochs must be at least 1");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] >= epochs) throw ConfigError("train.milestones must be < train.epochs");
    if (i > 0 && milestones[i] <= milestones[i - 1]) throw ConfigError("train.milestones must be strictly increasing");
  }
  if (!(lr_gamma > 0.0 && lr_gamma <= 1.0)) throw ConfigError("train.lr_gamma must lie in (0, 1]");
  if (window_T % 2 == 0) {
    throw ConfigError("train.window_T must be odd and positive, got " + std::to_string(window_T));
  }
  if (stride == 0) throw ConfigError("train.stride must be at least 1");
  if (optimizer != "sgd") throw ConfigError("train.optimizer: only 'sgd' is supported, got '" + optimizer + "'");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must lie in [0, 1)");
}

std::size_t TrainConfig::effective_batch_size(models::HeadKind kind) const noexcept {
  if (batch_size != 0) return batch_size;
  return kind == models::HeadKind::Static ? 128 : 32;
}

double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
  if (epoch >= config.epochs) {
    throw InvalidInputError("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(config.epochs) + ")");
  }
  int passed = 0;
  for (auto m : config.milestones) passed += m <= epoch ? 1 : 0;
  return config.base_lr / std::pow(1.0 / config.lr_gamma, passed);
}

std::string canonical_train_config(const TrainConfig& c) {
  std::string out;
  out += "base_lr=" + exact(c.base_lr) + "\n";
  out += "epochs=" + std::to_string(c.epochs) + "\n";
  out += "milestones=";
  for (std::size_t i = 0; i < c.milestones.size(); ++i) out += (i ? "," : "") + std::to_string(c.milestones[i]);
  out += "\n";
  out += "lr_gamma=" + exact(c.lr_gamma) + "\n";
  out += "batch_size=" + std::to_string(c.batch_size) + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "window_T=" + std::to_string(c.window_T) + "\n";
  out += "stride=" + std::to_string(c.stride) + "\n";
  out += "optimizer=" + c.optimizer + "\n";
  out += "momentum=" + exact(c.momentum) + "\n";
  return out;
}

std::string train_fingerprint(const TrainConfig& config) {
  return models::fingerprint_of(canonical_train_config(config));
}

}  // namespace vfer::training
