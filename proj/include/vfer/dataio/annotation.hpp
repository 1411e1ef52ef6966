#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vfer::dataio {

// Per-video expression labels, one code per frame in frame order.
// Frames live at `<frame_dir>/<index:05d>.jpg` with 0-based indices.
struct VideoAnnotation {
  std::string video_id;
  std::vector<int> labels;
  std::filesystem::path frame_dir;

  std::size_t frame_count() const noexcept { return labels.size(); }
  std::size_t valid_count() const noexcept;
  std::size_t invalid_count() const noexcept { return frame_count() - valid_count(); }
};

// Parses annotation text: one integer code in {-1, 0..6} per line, optional
// trailing newline. Errors carry the offending 1-based line number.
std::vector<int> parse_annotation_text(std::string_view text);

// Loads `<video_id>.txt`. The video id is the file stem; the frame directory
// is `<frames_root>/<video_id>`.
VideoAnnotation load_annotation_file(const std::filesystem::path& path,
                                     const std::filesystem::path& frames_root = {});

// All `*.txt` annotations in a split directory, sorted by video id.
std::vector<VideoAnnotation> load_annotation_split(const std::filesystem::path& dir,
                                                   const std::filesystem::path& frames_root);

void write_annotation_file(const std::filesystem::path& path, std::span<const int> labels);

struct ManifestEntry {
  std::string video_id;
  std::size_t frame_count = 0;
  std::size_t valid_count = 0;

  bool operator==(const ManifestEntry&) const = default;
};

// CSV with header `video_id,frames,valid`.
void write_manifest(const std::filesystem::path& path, std::span<const VideoAnnotation> videos);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace vfer::dataio
