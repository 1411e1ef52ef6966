#include "vfer/dataio/frame_store.hpp"

#include <cstdio>

#include "vfer/core/errors.hpp"

namespace vfer::dataio {

FrameStore::FrameStore(std::filesystem::path frames_root, Normalization norm, bool cache)
    : root_(std::move(frames_root)), norm_(norm), use_cache_(cache) {}

std::string FrameStore::frame_file_name(std::size_t frame_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%05zu.jpg", frame_index);
  return name;
}

std::filesystem::path FrameStore::frame_path(const std::string& video_id, std::size_t frame_index) const {
  return root_ / video_id / frame_file_name(frame_index);
}

const RgbImage& FrameStore::load_crop(const std::string& video_id, std::size_t frame_index) {
  auto key = std::make_pair(video_id, frame_index);
  if (use_cache_) {
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  RgbImage image;
  try {
    image = read_jpeg(frame_path(video_id, frame_index));
  } catch (const IoError& e) {
    throw IoError("video " + video_id + " frame " + std::to_string(frame_index) + ": " + e.what());
  }
  if (image.width != kFrameSize || image.height != kFrameSize) image = resize_bilinear(image, kFrameSize, kFrameSize);
  if (!use_cache_) {
    scratch_ = std::move(image);
    return scratch_;
  }
  return cache_.emplace(std::move(key), std::move(image)).first->second;
}

FrameImage FrameStore::load_and_normalize_frame(const std::string& video_id, std::size_t frame_index) {
  FrameImage frame{video_id, frame_index, std::vector<double>(kFrameSize * kFrameSize * 3)};
  load_normalized_into(video_id, frame_index, frame.pixels);
  return frame;
}

void FrameStore::load_normalized_into(const std::string& video_id, std::size_t frame_index, std::span<double> out) {
  normalize_into(load_crop(video_id, frame_index), norm_, out);
}

}  // namespace vfer::dataio
