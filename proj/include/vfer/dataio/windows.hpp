#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vfer/dataio/annotation.hpp"

namespace vfer::dataio {

inline constexpr std::size_t kDefaultWindow = 9;

// A run of T frame indices from one video. `center` is the position inside
// the window whose output is kept at inference time, always (T-1)/2.
struct WindowSpec {
  std::string video_id;
  std::vector<std::size_t> frame_indices;
  std::size_t center = 0;

  std::size_t length() const noexcept { return frame_indices.size(); }
  std::size_t target_frame() const { return frame_indices.at(center); }

  bool operator==(const WindowSpec&) const = default;
};

// Throws ConfigError unless T is odd and positive.
void require_odd_window(std::size_t window);

// Contiguous windows starting at 0, stride, 2*stride, ... with no padding.
// Windows whose labels are all Invalid are dropped. A video shorter than T
// yields no windows.
std::vector<WindowSpec> index_training_windows(const VideoAnnotation& ann, std::size_t window,
                                               std::size_t stride);

// One window per frame, centred on it, with edge frames replicated.
std::vector<WindowSpec> build_inference_windows(const VideoAnnotation& ann, std::size_t window);

// Single centred window for `frame`, edge-replicated.
WindowSpec inference_window(const std::string& video_id, std::size_t frame_count, std::size_t frame,
                            std::size_t window);

}  // namespace vfer::dataio
