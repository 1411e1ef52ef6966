#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vfer::dataio {

// Side length of every face crop fed to a backbone.
inline constexpr std::size_t kFrameSize = 112;

// 8-bit interleaved RGB, row-major (height, width, 3).
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }

  bool operator==(const RgbImage&) const = default;
};

// Decoding treats libjpeg warnings (e.g. premature end of data) as
// corruption and throws IoError.
RgbImage decode_jpeg(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality = 95);
RgbImage read_jpeg(const std::filesystem::path& path);
void write_jpeg(const std::filesystem::path& path, const RgbImage& image, int quality = 95);

// Bilinear resampling with half-pixel centres and edge clamping; output is
// rounded to the nearest 8-bit value.
RgbImage resize_bilinear(const RgbImage& image, std::size_t width, std::size_t height);

// value = (pixel / 255 - mean[c]) / std[c]
struct Normalization {
  std::array<double, 3> mean{0.5, 0.5, 0.5};
  std::array<double, 3> stddev{0.5, 0.5, 0.5};

  bool operator==(const Normalization&) const = default;
};

// A normalized 112x112x3 face crop (HWC) with provenance.
struct FrameImage {
  std::string video_id;
  std::size_t frame_index = 0;
  std::vector<double> pixels;
};

// Writes normalized HWC values of a kFrameSize image into `out`
// (size kFrameSize*kFrameSize*3).
void normalize_into(const RgbImage& image, const Normalization& norm, std::span<double> out);

}  // namespace vfer::dataio
