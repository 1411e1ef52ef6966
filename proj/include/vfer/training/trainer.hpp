#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vfer/dataio/annotation.hpp"
#include "vfer/dataio/frame_store.hpp"
#include "vfer/metrics/metrics.hpp"
#include "vfer/models/model.hpp"
#include "vfer/training/train_config.hpp"

namespace vfer::training {

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // frame-weighted mean over the epoch
  std::size_t train_frames = 0;
  std::size_t steps = 0;
  std::size_t skipped_samples = 0;  // samples dropped because a frame failed to load
  std::optional<metrics::MetricReport> validation;
};

// One line of the metric log: `epoch=.. lr=.. train_loss=.. ...`.
std::string format_epoch_record(const EpochRecord& record);

struct FitOptions {
  // Receives metrics.log, last.ckpt and best.ckpt. Empty: nothing written.
  std::filesystem::path output_dir;
  std::span<const dataio::VideoAnnotation> validation;
  dataio::FrameStore* validation_frames = nullptr;  // defaults to the training store
  std::filesystem::path resume_from;
  bool allow_fingerprint_mismatch = false;
  // Stop once this many epochs are complete (for interrupting a run).
  std::optional<std::size_t> stop_after;
  std::function<void(const EpochRecord&)> on_epoch;
  // Receives one message per skipped sample.
  std::function<void(const std::string&)> on_warning;
};

struct FitResult {
  std::size_t start_epoch = 0;
  std::vector<EpochRecord> log;  // epochs run by this call
  double best_e_total = -1.0;
  std::size_t best_epoch = 0;
};

// One training sample: frame indices of one video and their labels.
struct Sample {
  std::size_t video = 0;
  std::vector<std::size_t> frames;
};

// Static heads: every valid frame alone. Temporal heads: training windows of
// config.window_T frames at config.stride. Throws InvalidInputError if the
// result is empty.
std::vector<Sample> training_samples(std::span<const dataio::VideoAnnotation> videos, const TrainConfig& config,
                                     bool temporal);

// Trains `model` in place. A sample with an unreadable frame is skipped
// and reported through on_warning. Shuffling per epoch is seeded by (seed, epoch)
// and dropout per step by (seed, epoch, step), so a resumed run performs
// exactly the updates an uninterrupted one would.
FitResult fit(models::ModelBundle& model, std::span<const dataio::VideoAnnotation> videos,
              dataio::FrameStore& frames, const TrainConfig& config, const FitOptions& options = {});

}  // namespace vfer::training
