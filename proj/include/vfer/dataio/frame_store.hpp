#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "vfer/dataio/image.hpp"

namespace vfer::dataio {

// Loads face crops from `<frames_root>/<video_id>/<index:05d>.jpg`, resizes
// them to 112x112 when needed and normalizes them. Decoded 8-bit crops are
// optionally memoized; the cache is not thread-safe.
class FrameStore {
 public:
  explicit FrameStore(std::filesystem::path frames_root, Normalization norm = {}, bool cache = true);

  const std::filesystem::path& root() const noexcept { return root_; }
  const Normalization& normalization() const noexcept { return norm_; }

  static std::string frame_file_name(std::size_t frame_index);
  std::filesystem::path frame_path(const std::string& video_id, std::size_t frame_index) const;

  // 112x112 crop. Throws IoError naming the video and frame on failure.
  const RgbImage& load_crop(const std::string& video_id, std::size_t frame_index);

  FrameImage load_and_normalize_frame(const std::string& video_id, std::size_t frame_index);
  void load_normalized_into(const std::string& video_id, std::size_t frame_index, std::span<double> out);

  void clear_cache() { cache_.clear(); }

 private:
  std::filesystem::path root_;
  Normalization norm_;
  bool use_cache_;
  RgbImage scratch_;
  std::map<std::pair<std::string, std::size_t>, RgbImage> cache_;
};

}  // namespace vfer::dataio
