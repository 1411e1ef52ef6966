#include "vfer/training/checkpoint.hpp"

#include <cstdio>

#include "vfer/core/errors.hpp"
#include "vfer/models/weights_io.hpp"

namespace vfer::training {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOptimPrefix = "optim.";
constexpr const char* kMetricPrefix = "metric.";

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::string& require(const models::WeightFile& file, const std::string& key) {
  const auto it = file.metadata.find(key);
  if (it == file.metadata.end()) throw LoadError("checkpoint lacks '" + key + "'");
  return it->second;
}

Checkpoint state_from(const models::WeightFile& file) {
  if (require(file, "kind") != "checkpoint") throw LoadError("not a checkpoint file");
  Checkpoint c;
  try {
    c.epochs_completed = std::stoull(require(file, "epochs_completed"));
    c.best_e_total = std::stod(require(file, "best_e_total"));
    c.best_epoch = std::stoull(require(file, "best_epoch"));
    c.model_fingerprint = require(file, "fingerprint");
    c.train_fingerprint = require(file, "train_fingerprint");
    for (const auto& [key, value] : file.metadata) {
      if (key.rfind(kMetricPrefix, 0) == 0) c.metrics[key.substr(std::string(kMetricPrefix).size())] = std::stod(value);
    }
  } catch (const std::logic_error&) {
    throw LoadError("malformed checkpoint metadata");
  }
  return c;
}

}  // namespace

void save_checkpoint(const fs::path& path, models::ModelBundle& model, const SgdMomentum& optimizer,
                     const TrainConfig& config, const Checkpoint& state) {
  models::WeightFile file = models::model_weights(model);
  file.metadata["kind"] = "checkpoint";
  file.metadata["epochs_completed"] = std::to_string(state.epochs_completed);
  file.metadata["best_e_total"] = exact(state.best_e_total);
  file.metadata["best_epoch"] = std::to_string(state.best_epoch);
  file.metadata["train_fingerprint"] = train_fingerprint(config);
  file.metadata["train_config"] = canonical_train_config(config);
  for (const auto& [key, value] : state.metrics) file.metadata[kMetricPrefix + key] = exact(value);
  const auto& params = optimizer.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    file.arrays.emplace_back(kOptimPrefix + params[i].name, optimizer.buffers()[i]);
  }
  // Write then rename so an interrupted save never truncates the last good file.
  fs::path tmp = path;
  tmp += ".tmp";
  models::write_weight_file(tmp, file);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint read_checkpoint(const fs::path& path) { return state_from(models::read_weight_file(path)); }

Checkpoint load_checkpoint(const fs::path& path, models::ModelBundle& model, SgdMomentum* optimizer,
                           const TrainConfig* config, bool allow_mismatch) {
  const models::WeightFile file = models::read_weight_file(path);
  Checkpoint state = state_from(file);
  if (!allow_mismatch) {
    if (state.model_fingerprint != model.fingerprint()) {
      throw FingerprintMismatchError("checkpoint " + path.string() + ": model config fingerprint " + state.model_fingerprint +
                                     " differs from current " + model.fingerprint() + " (override to resume anyway)");
    }
    if (config != nullptr && state.train_fingerprint != train_fingerprint(*config)) {
      throw FingerprintMismatchError("checkpoint " + path.string() + ": training config fingerprint " + state.train_fingerprint +
                                     " differs from current " + train_fingerprint(*config) +
                                     " (override to resume anyway)");
    }
  }
  models::assign_model_weights(model, file);
  if (optimizer != nullptr) {
    const auto& params = optimizer->parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor* buf = file.find(kOptimPrefix + params[i].name);
      if (buf == nullptr) throw LoadError("checkpoint lacks optimizer state for '" + params[i].name + "'");
      if (buf->shape() != optimizer->buffers()[i].shape()) {
        throw LoadError("optimizer state shape mismatch for '" + params[i].name + "'");
      }
      optimizer->buffers()[i] = *buf;
    }
  }
  return state;
}

}  // namespace vfer::training
