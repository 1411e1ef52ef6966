#include "vfer/training/trainer.hpp"

#include <cstdio>
#include <fstream>

#include "vfer/core/errors.hpp"
#include "vfer/core/random.hpp"
#include "vfer/dataio/windows.hpp"
#include "vfer/inference/predict.hpp"
#include "vfer/training/checkpoint.hpp"
#include "vfer/training/loss.hpp"
#include "vfer/training/optimizer.hpp"

namespace vfer::training {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0x4452;
constexpr std::size_t kFrameValues = dataio::kFrameSize * dataio::kFrameSize * 3;

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

metrics::MetricReport validate(models::ModelBundle& model, std::span<const dataio::VideoAnnotation> videos,
                               dataio::FrameStore& frames, std::size_t window) {
  std::vector<int> y_true;
  std::vector<int> y_pred;
  for (const auto& v : videos) {
    const auto probs = inference::predict_video(model, v, frames, window);
    for (std::size_t f = 0; f < v.labels.size(); ++f) {
      y_true.push_back(v.labels[f]);
      y_pred.push_back(predicted_code(probs[f]));
    }
  }
  return metrics::make_report(metrics::confusion_matrix(y_true, y_pred));
}

}  // namespace

std::string format_epoch_record(const EpochRecord& r) {
  std::string out = "epoch=" + std::to_string(r.epoch) + " lr=" + exact(r.lr) + " train_loss=" + exact(r.train_loss) +
                    " train_frames=" + std::to_string(r.train_frames) + " steps=" + std::to_string(r.steps);
  if (r.skipped_samples > 0) out += " skipped=" + std::to_string(r.skipped_samples);
  if (r.validation) {
    out += " val_macro_f1=" + exact(r.validation->macro_f1) + " val_total_accuracy=" +
           exact(r.validation->total_accuracy) + " val_e_total=" + exact(r.validation->e_total);
  }
  return out;
}

std::vector<Sample> training_samples(std::span<const dataio::VideoAnnotation> videos, const TrainConfig& config,
                                     bool temporal) {
  std::vector<Sample> out;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    if (temporal) {
      for (auto& w : dataio::index_training_windows(videos[v], config.window_T, config.stride)) {
        out.push_back({v, std::move(w.frame_indices)});
      }
    } else {
      for (std::size_t f = 0; f < videos[v].labels.size(); ++f) {
        if (is_valid_code(videos[v].labels[f])) out.push_back({v, {f}});
      }
    }
  }
  if (out.empty()) throw InvalidInputError("training set yields no samples with valid labels");
  return out;
}

FitResult fit(models::ModelBundle& model, std::span<const dataio::VideoAnnotation> videos,
              dataio::FrameStore& frames, const TrainConfig& config, const FitOptions& options) {
  config.validate();
  if (videos.empty()) throw InvalidInputError("empty training dataset");
  const bool temporal = model.is_temporal();
  const auto samples = training_samples(videos, config, temporal);
  const std::size_t steps_per_sample = temporal ? config.window_T : 1;
  const std::size_t batch_size = config.effective_batch_size(model.kind());

  SgdMomentum optimizer(model.parameters(), config.momentum);
  FitResult result;
  Checkpoint state;
  if (!options.resume_from.empty()) {
    state = load_checkpoint(options.resume_from, model, &optimizer, &config, options.allow_fingerprint_mismatch);
    if (state.epochs_completed > config.epochs) throw ConfigError("checkpoint is past the configured epoch count");
    result.start_epoch = state.epochs_completed;
  }
  result.best_e_total = state.best_e_total;
  result.best_epoch = state.best_epoch;

  const bool write = !options.output_dir.empty();
  std::ofstream log;
  if (write) {
    fs::create_directories(options.output_dir);
    log.open(options.output_dir / "metrics.log", std::ios::app);
    if (!log) throw IoError("cannot open metric log in " + options.output_dir.string());
  }
  dataio::FrameStore& val_frames = options.validation_frames ? *options.validation_frames : frames;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t epoch = result.start_epoch; epoch < config.epochs; ++epoch) {
    if (options.stop_after && epoch >= *options.stop_after) break;
    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr_at_epoch(config, epoch);

    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(derive_seed(config.seed, kShuffleStream), epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - begin);
      Tensor batch({count, steps_per_sample, dataio::kFrameSize, dataio::kFrameSize, 3});
      std::vector<int> labels;
      labels.reserve(count * steps_per_sample);
      std::size_t loaded = 0;
      for (std::size_t b = 0; b < count; ++b) {
        const auto& s = samples[order[begin + b]];
        const auto& video = videos[s.video];
        try {
          for (std::size_t t = 0; t < s.frames.size(); ++t) {
            frames.load_normalized_into(
                video.video_id, s.frames[t],
                batch.values().subspan((loaded * steps_per_sample + t) * kFrameValues, kFrameValues));
          }
        } catch (const IoError& e) {
          ++record.skipped_samples;
          if (options.on_warning) options.on_warning(std::string("skipping sample: ") + e.what());
          continue;
        }
        for (std::size_t f : s.frames) labels.push_back(video.labels[f]);
        ++loaded;
      }
      if (loaded == 0) continue;
      if (loaded < count) {
        batch = Tensor({loaded, steps_per_sample, dataio::kFrameSize, dataio::kFrameSize, 3},
                       std::vector<double>(batch.data(), batch.data() + loaded * steps_per_sample * kFrameValues));
      }
      std::size_t valid = 0;
      for (int y : labels) valid += is_valid_code(y) ? 1 : 0;
      if (valid == 0) continue;
      model.zero_grad();
      model.reseed_dropout(derive_seed(derive_seed(derive_seed(config.seed, kDropoutStream), epoch), record.steps));
      const Tensor logits = model.forward(batch, true);
      const LossResult loss = masked_cross_entropy(logits, labels);
      model.backward(loss.grad);
      optimizer.step(record.lr);
      loss_sum += loss.value * static_cast<double>(loss.valid_frames);
      record.train_frames += loss.valid_frames;
      ++record.steps;
    }
    if (record.train_frames == 0) throw InvalidInputError("epoch " + std::to_string(epoch) + " had no loadable samples");
    record.train_loss = loss_sum / static_cast<double>(record.train_frames);

    if (!options.validation.empty()) {
      record.validation = validate(model, options.validation, val_frames, config.window_T);
    }

    state.epochs_completed = epoch + 1;
    state.metrics = {{"epoch", static_cast<double>(epoch)}, {"lr", record.lr}, {"train_loss", record.train_loss}};
    // Without validation the newest epoch counts as best.
    const double score = record.validation ? record.validation->e_total : 0.0;
    const bool improved = !record.validation || result.best_e_total < 0.0 || score > result.best_e_total;
    if (record.validation) {
      state.metrics["val_macro_f1"] = record.validation->macro_f1;
      state.metrics["val_total_accuracy"] = record.validation->total_accuracy;
      state.metrics["val_e_total"] = record.validation->e_total;
    }
    if (improved) {
      result.best_e_total = record.validation ? score : -1.0;
      result.best_epoch = epoch;
    }
    state.best_e_total = result.best_e_total;
    state.best_epoch = result.best_epoch;

    if (write) {
      log << format_epoch_record(record) << "\n" << std::flush;
      save_checkpoint(options.output_dir / "last.ckpt", model, optimizer, config, state);
      if (improved) save_checkpoint(options.output_dir / "best.ckpt", model, optimizer, config, state);
    }
    if (options.on_epoch) options.on_epoch(record);
    result.log.push_back(std::move(record));
  }
  return result;
}

}  // namespace vfer::training
