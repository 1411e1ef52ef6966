#include "vfer/core/labels.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vfer/core/errors.hpp"

namespace vfer {

namespace {

constexpr std::array<std::string_view, 8> kNames = {
    "Neutral", "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise", "Invalid"};

int parse_int_exact(std::string_view text, std::size_t line) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("expected an integer code, got '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace

std::string_view label_name(ExpressionLabel label) noexcept {
  return kNames[static_cast<std::size_t>(label)];
}

ExpressionLabel label_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<ExpressionLabel>(i);
  }
  throw ParseError("unknown expression name '" + std::string(name) + "'");
}

LabelMap::LabelMap()
    : by_code_{ExpressionLabel::Neutral, ExpressionLabel::Anger,     ExpressionLabel::Disgust,
               ExpressionLabel::Fear,    ExpressionLabel::Happiness, ExpressionLabel::Sadness,
               ExpressionLabel::Surprise} {}

const LabelMap& LabelMap::standard() {
  static const LabelMap map;
  return map;
}

LabelMap LabelMap::parse(std::string_view text) {
  if (text.empty()) throw ParseError("empty label map");
  if (text.back() == '\n') text.remove_suffix(1);

  LabelMap map;
  std::array<bool, kNumClasses> seen_code{};
  std::array<bool, kNumClasses> seen_label{};
  bool seen_invalid = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    ++line_no;
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected 'code,name'", line_no);
    const int code = parse_int_exact(line.substr(0, comma), line_no);
    ExpressionLabel label;
    try {
      label = label_from_name(line.substr(comma + 1));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }

    if (code == kInvalidCode) {
      if (label != ExpressionLabel::Invalid) throw ParseError("code -1 must map to Invalid", line_no);
      if (seen_invalid) throw ParseError("duplicate code -1", line_no);
      seen_invalid = true;
      continue;
    }
    if (!is_valid_code(code)) throw ParseError("code out of range: " + std::to_string(code), line_no);
    if (label == ExpressionLabel::Invalid) throw ParseError("Invalid may only map to -1", line_no);
    const auto li = static_cast<std::size_t>(label);
    if (seen_code[static_cast<std::size_t>(code)]) throw ParseError("duplicate code " + std::to_string(code), line_no);
    if (seen_label[li]) throw ParseError("duplicate name " + std::string(label_name(label)), line_no);
    seen_code[static_cast<std::size_t>(code)] = true;
    seen_label[li] = true;
    map.by_code_[static_cast<std::size_t>(code)] = label;
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (!seen_code[static_cast<std::size_t>(c)]) throw ParseError("missing code " + std::to_string(c));
  }
  return map;
}

LabelMap LabelMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open label map " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string LabelMap::serialize() const {
  std::string out;
  for (int c = 0; c < kNumClasses; ++c) {
    out += std::to_string(c) + "," + std::string(label_name(by_code_[static_cast<std::size_t>(c)])) + "\n";
  }
  out += "-1,Invalid\n";
  return out;
}

ExpressionLabel LabelMap::decode(int code) const {
  if (code == kInvalidCode) return ExpressionLabel::Invalid;
  if (!is_valid_code(code)) throw ParseError("label code out of range: " + std::to_string(code));
  return by_code_[static_cast<std::size_t>(code)];
}

int LabelMap::encode(ExpressionLabel label) const noexcept {
  if (label == ExpressionLabel::Invalid) return kInvalidCode;
  for (int c = 0; c < kNumClasses; ++c) {
    if (by_code_[static_cast<std::size_t>(c)] == label) return c;
  }
  return kInvalidCode;  // unreachable for a well-formed map
}

ExpressionLabel decode_label(int code) { return LabelMap::standard().decode(code); }

int encode_label(ExpressionLabel label) noexcept { return LabelMap::standard().encode(label); }

}  // namespace vfer
