#include "vfer/inference/predictions_io.hpp"

#include <charconv>
#include <cstdio>
#include <tuple>
#include <fstream>
#include <sstream>

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"

namespace vfer::inference {

namespace {

constexpr const char* kHeader = "video_id,frame,pred,prob_0,prob_1,prob_2,prob_3,prob_4,prob_5,prob_6";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError("bad number '" + s + "'", line_no);
  return value;
}

}  // namespace

PredictionRecord PredictionRecord::make(std::string video_id, std::size_t frame, const ProbVector& probs) {
  PredictionRecord r;
  r.video_id = std::move(video_id);
  r.frame_index = frame;
  r.probs = probs;
  r.predicted = predicted_code(probs);
  return r;
}

std::string format_predictions(std::span<const PredictionRecord> records) {
  std::string out = std::string(kHeader) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.video_id.empty() || r.video_id.find_first_of(",\n\r") != std::string::npos) {
      throw InvalidInputError("video id '" + r.video_id + "' cannot be written to CSV");
    }
    if (i > 0) {
      const auto& p = records[i - 1];
      if (!(std::tie(p.video_id, p.frame_index) < std::tie(r.video_id, r.frame_index))) {
        throw InvalidInputError("prediction records are not sorted by (video_id, frame) at row " +
                                std::to_string(i + 1) + " (" + r.video_id + "/" + std::to_string(r.frame_index) + ")");
      }
    }
    out += r.video_id;
    out += "," + std::to_string(r.frame_index) + "," + std::to_string(r.predicted);
    for (double v : r.probs.values) {
      std::snprintf(buf, sizeof(buf), ",%.9g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records) {
  const std::string text = format_predictions(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ParseError("missing prediction CSV header", 1);
  std::vector<PredictionRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError("empty line", line_no);
    const auto cells = split_csv(line);
    if (cells.size() != 3 + kNumClasses) throw ParseError("expected 10 columns", line_no);
    PredictionRecord r;
    r.video_id = cells[0];
    r.frame_index = parse_number<std::size_t>(cells[1], line_no);
    r.predicted = parse_number<int>(cells[2], line_no);
    if (!is_valid_code(r.predicted)) throw ParseError("prediction must be a class code 0..6", line_no);
    for (int c = 0; c < kNumClasses; ++c) r.probs[c] = parse_number<double>(cells[3 + c], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str());
}

}  // namespace vfer::inference
