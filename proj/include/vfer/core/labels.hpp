#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

namespace vfer {

inline constexpr int kNumClasses = 7;
inline constexpr int kInvalidCode = -1;

// The seven basic expressions plus the annotation-level Invalid marker.
enum class ExpressionLabel { Neutral, Anger, Disgust, Fear, Happiness, Sadness, Surprise, Invalid };

inline constexpr std::array<ExpressionLabel, 8> kAllLabels = {
    ExpressionLabel::Neutral, ExpressionLabel::Anger,   ExpressionLabel::Disgust,
    ExpressionLabel::Fear,    ExpressionLabel::Happiness, ExpressionLabel::Sadness,
    ExpressionLabel::Surprise, ExpressionLabel::Invalid};

std::string_view label_name(ExpressionLabel label) noexcept;
ExpressionLabel label_from_name(std::string_view name);

inline bool is_valid_code(int code) noexcept { return code >= 0 && code < kNumClasses; }

// Bijection between annotation codes 0..6 and the seven expressions; -1 is
// always Invalid. The standard map orders Neutral first, then the remaining
// six expressions alphabetically.
class LabelMap {
 public:
  LabelMap();

  static const LabelMap& standard();

  // One `code,name` pair per line. No whitespace is tolerated except a single
  // trailing newline at end of file. Codes 0..6 must each appear exactly once;
  // `-1,Invalid` may optionally be listed.
  static LabelMap parse(std::string_view text);
  static LabelMap load(const std::filesystem::path& path);

  std::string serialize() const;

  ExpressionLabel decode(int code) const;
  int encode(ExpressionLabel label) const noexcept;

  bool operator==(const LabelMap&) const = default;

 private:
  std::array<ExpressionLabel, kNumClasses> by_code_;
};

// Shorthand for the standard map.
ExpressionLabel decode_label(int code);
int encode_label(ExpressionLabel label) noexcept;

}  // namespace vfer
