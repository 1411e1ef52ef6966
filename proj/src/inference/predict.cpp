#include "vfer/inference/predict.hpp"

#include <algorithm>

#include "vfer/core/errors.hpp"
#include "vfer/dataio/windows.hpp"

namespace vfer::inference {

namespace {
constexpr std::size_t kFeatureChunk = 32;
constexpr std::size_t kFrameValues = dataio::kFrameSize * dataio::kFrameSize * 3;
}  // namespace

std::size_t middle_frame_index(std::size_t window) {
  dataio::require_odd_window(window);
  return (window - 1) / 2;
}

Tensor load_frames(dataio::FrameStore& frames, const std::string& video_id, const std::vector<std::size_t>& indices) {
  Tensor out({1, indices.size(), dataio::kFrameSize, dataio::kFrameSize, 3});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    frames.load_normalized_into(video_id, indices[i], out.values().subspan(i * kFrameValues, kFrameValues));
  }
  return out;
}

Tensor video_features(models::ModelBundle& model, const dataio::VideoAnnotation& ann, dataio::FrameStore& frames) {
  const std::size_t n = ann.frame_count();
  if (n == 0) throw InvalidInputError("video " + ann.video_id + " has no frames");
  const std::size_t dim = model.backbone().feature_dim();
  Tensor features({1, n, dim});
  for (std::size_t start = 0; start < n; start += kFeatureChunk) {
    const std::size_t count = std::min(kFeatureChunk, n - start);
    std::vector<std::size_t> indices(count);
    for (std::size_t i = 0; i < count; ++i) indices[i] = start + i;
    const Tensor chunk = model.extract_features(load_frames(frames, ann.video_id, indices), false);
    std::copy(chunk.values().begin(), chunk.values().end(), features.data() + start * dim);
  }
  return features;
}

std::vector<ProbVector> predict_from_features(models::ModelBundle& model, const Tensor& features, std::size_t window) {
  if (features.rank() != 3 || features.dim(0) != 1 || features.dim(1) == 0) {
    throw InvalidInputError("expected (1, n, D) features, got " + shape_string(features.shape()));
  }
  const std::size_t n = features.dim(1);
  const std::size_t dim = features.dim(2);
  std::vector<ProbVector> out(n);

  auto to_probs = [](const double* logits) {
    LogitVector lv;
    std::copy(logits, logits + kNumClasses, lv.values.begin());
    return softmax(lv);
  };

  if (!model.is_temporal()) {
    const Tensor logits = model.classify(features, false);
    for (std::size_t f = 0; f < n; ++f) out[f] = to_probs(logits.data() + f * kNumClasses);
    return out;
  }

  const std::size_t mid = middle_frame_index(window);
  Tensor win({1, window, dim});
  for (std::size_t f = 0; f < n; ++f) {
    const auto spec = dataio::inference_window("", n, f, window);
    for (std::size_t t = 0; t < window; ++t) {
      const double* src = features.data() + spec.frame_indices[t] * dim;
      std::copy(src, src + dim, win.data() + t * dim);
    }
    const Tensor logits = model.classify(win, false);
    out[f] = to_probs(logits.data() + mid * kNumClasses);
  }
  return out;
}

std::vector<ProbVector> predict_video(models::ModelBundle& model, const dataio::VideoAnnotation& ann,
                                      dataio::FrameStore& frames, std::size_t window) {
  if (model.is_temporal()) dataio::require_odd_window(window);
  return predict_from_features(model, video_features(model, ann, frames), window);
}

}  // namespace vfer::inference
