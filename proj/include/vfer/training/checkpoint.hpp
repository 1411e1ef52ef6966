#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "vfer/models/model.hpp"
#include "vfer/training/optimizer.hpp"
#include "vfer/training/train_config.hpp"

namespace vfer::training {

// Model weight container plus `optim.<param>` momentum buffers and metadata:
// epochs completed, model and training fingerprints, best validation score
// so far and a snapshot of the last epoch's metrics. A checkpoint is also a
// valid model weight file.
struct Checkpoint {
  std::size_t epochs_completed = 0;
  std::string model_fingerprint;
  std::string train_fingerprint;
  double best_e_total = -1.0;  // -1: no validation score yet
  std::size_t best_epoch = 0;
  std::map<std::string, double> metrics;
};

void save_checkpoint(const std::filesystem::path& path, models::ModelBundle& model, const SgdMomentum& optimizer,
                     const TrainConfig& config, const Checkpoint& state);

// Metadata only.
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Restores model parameters and, if given, optimizer buffers. Refuses with
// FingerprintMismatchError when the model config or (if `config` is given)
// the training config differs from the stored one, unless
// `allow_mismatch` is set.
Checkpoint load_checkpoint(const std::filesystem::path& path, models::ModelBundle& model, SgdMomentum* optimizer,
                           const TrainConfig* config, bool allow_mismatch = false);

}  // namespace vfer::training
