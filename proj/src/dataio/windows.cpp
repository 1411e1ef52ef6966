#include "vfer/dataio/windows.hpp"

#include <algorithm>

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"

namespace vfer::dataio {

void require_odd_window(std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw ConfigError("window length must be odd and positive, got " + std::to_string(window));
  }
}

std::vector<WindowSpec> index_training_windows(const VideoAnnotation& ann, std::size_t window,
                                               std::size_t stride) {
  require_odd_window(window);
  if (stride == 0) throw ConfigError("window stride must be positive");
  std::vector<WindowSpec> out;
  const std::size_t n = ann.frame_count();
  if (n < window) return out;
  for (std::size_t start = 0; start + window <= n; start += stride) {
    const auto first = ann.labels.begin() + static_cast<std::ptrdiff_t>(start);
    if (std::none_of(first, first + static_cast<std::ptrdiff_t>(window), is_valid_code)) continue;
    WindowSpec spec{ann.video_id, {}, (window - 1) / 2};
    spec.frame_indices.resize(window);
    for (std::size_t i = 0; i < window; ++i) spec.frame_indices[i] = start + i;
    out.push_back(std::move(spec));
  }
  return out;
}

WindowSpec inference_window(const std::string& video_id, std::size_t frame_count, std::size_t frame,
                            std::size_t window) {
  require_odd_window(window);
  if (frame >= frame_count) throw InvalidInputError("frame index beyond end of video");
  const auto half = static_cast<std::ptrdiff_t>((window - 1) / 2);
  const auto last = static_cast<std::ptrdiff_t>(frame_count) - 1;
  WindowSpec spec{video_id, std::vector<std::size_t>(window), (window - 1) / 2};
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(window); ++i) {
    const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(frame) - half + i;
    spec.frame_indices[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, last));
  }
  return spec;
}

std::vector<WindowSpec> build_inference_windows(const VideoAnnotation& ann, std::size_t window) {
  require_odd_window(window);
  std::vector<WindowSpec> out;
  out.reserve(ann.frame_count());
  for (std::size_t f = 0; f < ann.frame_count(); ++f) {
    out.push_back(inference_window(ann.video_id, ann.frame_count(), f, window));
  }
  return out;
}

}  // namespace vfer::dataio
