#include "vfer/dataio/annotation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"

namespace vfer::dataio {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    fn(text.substr(pos, end - pos), ++line_no);
    pos = end + 1;
  }
}

std::size_t parse_size(std::string_view field, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("expected a count, got '" + std::string(field) + "'", line_no);
  }
  return value;
}

}  // namespace

std::size_t VideoAnnotation::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), is_valid_code));
}

std::vector<int> parse_annotation_text(std::string_view text) {
  if (text.empty()) throw ParseError("empty annotation file");
  std::vector<int> labels;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    int code = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), code);
    if (line.empty() || ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError("expected an integer label, got '" + std::string(line) + "'", line_no);
    }
    if (code != kInvalidCode && !is_valid_code(code)) {
      throw ParseError("label code out of range: " + std::to_string(code), line_no);
    }
    labels.push_back(code);
  });
  return labels;
}

VideoAnnotation load_annotation_file(const fs::path& path, const fs::path& frames_root) {
  VideoAnnotation ann;
  ann.video_id = path.stem().string();
  ann.frame_dir = frames_root.empty() ? fs::path{} : frames_root / ann.video_id;
  try {
    ann.labels = parse_annotation_text(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return ann;
}

std::vector<VideoAnnotation> load_annotation_split(const fs::path& dir, const fs::path& frames_root) {
  if (!fs::is_directory(dir)) throw IoError("annotation directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<VideoAnnotation> videos;
  videos.reserve(files.size());
  for (const auto& f : files) videos.push_back(load_annotation_file(f, frames_root));
  return videos;
}

void write_annotation_file(const fs::path& path, std::span<const int> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (int code : labels) out << code << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_manifest(const fs::path& path, std::span<const VideoAnnotation> videos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "video_id,frames,valid\n";
  for (const auto& v : videos) out << v.video_id << ',' << v.frame_count() << ',' << v.valid_count() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<ManifestEntry> entries;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line_no == 1) {
      if (line != "video_id,frames,valid") throw ParseError("bad manifest header", 1);
      return;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParseError("expected 3 fields", line_no);
    entries.push_back({std::string(line.substr(0, c1)), parse_size(line.substr(c1 + 1, c2 - c1 - 1), line_no),
                       parse_size(line.substr(c2 + 1), line_no)});
  });
  return entries;
}

}  // namespace vfer::dataio
