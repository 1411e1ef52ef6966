#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vfer/models/config.hpp"

namespace vfer::training {

struct TrainConfig {
  double base_lr = 5e-4;
  std::size_t epochs = 10;
  std::vector<std::size_t> milestones{2, 4, 8};
  double lr_gamma = 0.1;
  // 0 selects the default for the head: 32 windows (temporal), 128 frames (static).
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::size_t window_T = 9;
  std::size_t stride = 9;
  std::string optimizer = "sgd";
  double momentum = 0.9;

  // Throws ConfigError naming the offending field.
  void validate() const;
  std::size_t effective_batch_size(models::HeadKind kind) const noexcept;
};

// base_lr * lr_gamma^k with k the number of milestones <= epoch. Computed as
// base_lr / (1/lr_gamma)^k, which is exact for gamma = 0.1 since 1/0.1 and
// its small powers are exact in binary. Throws InvalidInputError unless
// 0 <= epoch < epochs.
double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

// Every field, one `key=value` per line.
std::string canonical_train_config(const TrainConfig& config);
std::string train_fingerprint(const TrainConfig& config);

}  // namespace vfer::training
