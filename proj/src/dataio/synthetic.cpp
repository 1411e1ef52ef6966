#include "vfer/dataio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"
#include "vfer/core/random.hpp"
#include "vfer/dataio/frame_store.hpp"

namespace vfer::dataio {

namespace fs = std::filesystem;

namespace {

constexpr double kBackground = 0.45;
constexpr double kStripeAmplitude = 0.2;
constexpr double kStripeCycles = 5.0;
constexpr double kTint = 0.12;
constexpr double kBarWidth = 0.14;
constexpr double kBarBrightness = 0.4;
constexpr double kBarSpeed = 0.09;  // image widths per frame

struct VideoParams {
  double phase = 0.0;       // stripe phase, radians
  double start = 0.0;       // bar start position in [0, 1)
  double offset = 0.0;      // bar position along the other axis in [0, 1)
};

VideoParams draw_video_params(std::uint64_t video_seed) {
  Rng rng(video_seed);
  VideoParams p;
  p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  p.start = rng.uniform();
  p.offset = rng.uniform();
  return p;
}

int motion_rank(const SyntheticSpec& spec, int label_class) {
  const auto it = std::find(spec.motion_classes.begin(), spec.motion_classes.end(), label_class);
  return it == spec.motion_classes.end() ? -1 : static_cast<int>(it - spec.motion_classes.begin());
}

int static_rank(const SyntheticSpec& spec, int label_class) {
  int rank = 0;
  for (int c = 0; c < label_class; ++c) {
    if (motion_rank(spec, c) < 0) ++rank;
  }
  return rank;
}

// Distance on the unit circle between two positions in [0, 1).
double wrapped_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (image_size < 8) throw ConfigError("synthetic image_size must be at least 8");
  if (num_videos == 0 || frames_per_video == 0) throw ConfigError("synthetic dataset must be nonempty");
  if (class_count < 1 || class_count > 7) throw ConfigError("synthetic class_count must be in 1..7");
  for (int c : motion_classes) {
    if (c < 0 || c >= class_count) throw ConfigError("motion class out of range: " + std::to_string(c));
  }
  if (noise_level < 0.0) throw ConfigError("noise_level must be nonnegative");
  if (invalid_fraction < 0.0 || invalid_fraction >= 1.0) throw ConfigError("invalid_fraction must be in [0,1)");
}

RgbImage render_synthetic_frame(const SyntheticSpec& spec, int label_class, std::size_t frame,
                                std::uint64_t video_seed) {
  const VideoParams params = draw_video_params(video_seed);
  Rng noise(derive_seed(video_seed, frame + 1));
  const std::size_t size = spec.image_size;
  RgbImage image(size, size);

  const int motion = motion_rank(spec, label_class);
  const int stat = motion < 0 ? static_rank(spec, label_class) : -1;
  const int num_static = spec.class_count - static_cast<int>(spec.motion_classes.size());

  // Static cue parameters.
  const double theta = stat >= 0 ? std::numbers::pi * stat / std::max(num_static, 1) : 0.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  std::array<double, 3> tint{};
  if (stat >= 0) tint[static_cast<std::size_t>(stat % 3)] = (stat / 3) % 2 == 0 ? kTint : -kTint;

  // Motion cue parameters: the bar travels along `axis` in direction `sign`.
  const bool horizontal = motion >= 0 && (motion % 4) < 2;
  const double sign = motion >= 0 && motion % 2 == 1 ? -1.0 : 1.0;
  double bar = params.start + sign * kBarSpeed * static_cast<double>(frame);
  bar -= std::floor(bar);

  for (std::size_t y = 0; y < size; ++y) {
    const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(size);
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(size);
      double base = kBackground;
      if (stat >= 0) {
        base += kStripeAmplitude *
                std::sin(2.0 * std::numbers::pi * kStripeCycles * (u * cos_t + v * sin_t) + params.phase);
      } else if (motion >= 0) {
        const double along = horizontal ? u : v;
        if (wrapped_distance(along, bar) < kBarWidth / 2) base += kBarBrightness;
      }
      for (std::size_t c = 0; c < 3; ++c) {
        const double value = base + tint[c] + spec.noise_level * noise.normal();
        image.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value * 255.0), 0L, 255L));
      }
    }
  }
  return image;
}

std::vector<VideoAnnotation> generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed,
                                                        const fs::path& frames_root, const fs::path& annotation_dir) {
  spec.validate();
  fs::create_directories(annotation_dir);
  std::vector<VideoAnnotation> videos;
  videos.reserve(spec.num_videos);
  for (std::size_t i = 0; i < spec.num_videos; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%04zu", spec.id_prefix.c_str(), i);
    const int label_class = static_cast<int>(i % static_cast<std::size_t>(spec.class_count));
    const std::uint64_t video_seed = derive_seed(seed, i);

    VideoAnnotation ann{id, std::vector<int>(spec.frames_per_video, label_class), frames_root / id};
    if (i % 2 == 1) {
      const auto invalid = static_cast<std::size_t>(spec.invalid_fraction * static_cast<double>(spec.frames_per_video));
      std::fill_n(ann.labels.begin(), invalid, kInvalidCode);
    }

    fs::create_directories(ann.frame_dir);
    for (std::size_t f = 0; f < spec.frames_per_video; ++f) {
      write_jpeg(ann.frame_dir / FrameStore::frame_file_name(f), render_synthetic_frame(spec, label_class, f, video_seed));
    }
    write_annotation_file(annotation_dir / (ann.video_id + ".txt"), ann.labels);
    videos.push_back(std::move(ann));
  }
  return videos;
}

}  // namespace vfer::dataio
