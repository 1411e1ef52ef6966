#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vfer/dataio/annotation.hpp"
#include "vfer/dataio/image.hpp"

namespace vfer::dataio {

// Desk-scale stand-in for a video expression corpus.
//
// Video i carries class (i mod class_count) on every frame. Static classes
// are drawn as oriented sinusoidal stripes with a colour tint, one
// orientation per class. Motion classes all share one appearance, a bright
// bar on a plain background, and differ only in the direction the bar travels
// (+x, -x, +y, -y, cycling) with wrap-around. The bar's start position is
// uniform, so any single frame of a motion class is equally likely under
// every motion class.
struct SyntheticSpec {
  std::size_t num_videos = 28;
  std::size_t frames_per_video = 27;
  std::size_t image_size = kFrameSize;
  int class_count = 7;
  std::vector<int> motion_classes{5, 6};
  double noise_level = 0.05;
  // Odd-numbered videos get a leading run of this fraction of frames
  // labelled Invalid (-1).
  double invalid_fraction = 0.0;
  std::string id_prefix = "synth";

  void validate() const;
};

// Renders one frame as 8-bit RGB; exposed for tests.
RgbImage render_synthetic_frame(const SyntheticSpec& spec, int label_class, std::size_t frame,
                                std::uint64_t video_seed);

// Writes `<frames_root>/<id>/<index:05d>.jpg` and `<annotation_dir>/<id>.txt`
// for every video and returns the annotations. Deterministic in `seed`.
std::vector<VideoAnnotation> generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed,
                                                        const std::filesystem::path& frames_root,
                                                        const std::filesystem::path& annotation_dir);

}  // namespace vfer::dataio
