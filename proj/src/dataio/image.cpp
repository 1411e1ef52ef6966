#include "vfer/dataio/image.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <jpeglib.h>

#include "vfer/core/errors.hpp"

namespace vfer::dataio {

namespace fs = std::filesystem;

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  bool warned = false;
  char message[JMSG_LENGTH_MAX] = {};
};

void on_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void on_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) {
    auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    if (!mgr->warned) (*cinfo->err->format_message)(cinfo, mgr->message);
    mgr->warned = true;
  }
}

}  // namespace

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw IoError("empty JPEG data");
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error_exit;
  err.base.emit_message = on_emit_message;

  RgbImage image;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError(std::string("JPEG decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  if (cinfo.output_components != 3) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("JPEG does not decode to 3 channels");
  }
  image.width = cinfo.output_width;
  image.height = cinfo.output_height;
  image.pixels.resize(image.width * image.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = image.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * image.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  if (err.warned) throw IoError(std::string("corrupt JPEG: ") + err.message);
  return image;
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
  if (image.width == 0 || image.height == 0) throw InvalidInputError("cannot encode an empty image");
  jpeg_compress_struct cinfo{};
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error_exit;

  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw IoError(std::string("JPEG encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(image.pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * image.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buffer, buffer + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buffer);
  return out;
}

RgbImage read_jpeg(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_jpeg(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_jpeg(const fs::path& path, const RgbImage& image, int quality) {
  const auto bytes = encode_jpeg(image, quality);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

RgbImage resize_bilinear(const RgbImage& image, std::size_t width, std::size_t height) {
  if (image.width == 0 || image.height == 0 || width == 0 || height == 0) {
    throw InvalidInputError("resize of an empty image");
  }
  if (image.width == width && image.height == height) return image;
  RgbImage out(width, height);
  const double sx = static_cast<double>(image.width) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height) / static_cast<double>(height);
  const auto max_x = static_cast<double>(image.width - 1);
  const auto max_y = static_cast<double>(image.height - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c);
        const double bottom = (1.0 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c);
        const double v = (1.0 - wy) * top + wy * bottom;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

void normalize_into(const RgbImage& image, const Normalization& norm, std::span<double> out) {
  if (image.width != kFrameSize || image.height != kFrameSize) {
    throw InvalidInputError("normalize_into expects a 112x112 image");
  }
  if (out.size() != image.pixels.size()) throw InvalidInputError("normalize_into: output size mismatch");
  std::array<double, 3> scale{};
  std::array<double, 3> shift{};
  for (std::size_t c = 0; c < 3; ++c) {
    scale[c] = 1.0 / (255.0 * norm.stddev[c]);
    shift[c] = norm.mean[c] / norm.stddev[c];
  }
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const std::size_t c = i % 3;
    out[i] = static_cast<double>(image.pixels[i]) * scale[c] - shift[c];
  }
}

}  // namespace vfer::dataio
