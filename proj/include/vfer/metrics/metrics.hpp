#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "vfer/core/labels.hpp"

namespace vfer::metrics {

// Rows are true classes, columns predicted classes. Frames whose true label
// is Invalid are never counted.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const noexcept;
  std::uint64_t correct() const noexcept;
  std::uint64_t true_positives(int cls) const noexcept;
  std::uint64_t false_positives(int cls) const noexcept;
  std::uint64_t false_negatives(int cls) const noexcept;
  std::uint64_t support(int cls) const noexcept;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws InvalidInputError on length mismatch, a prediction outside 0..6,
// or a true label outside {-1, 0..6}.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

// Precision, recall and F1 of one class against the rest. Any vanishing
// denominator yields 0 for that quantity.
ClassScores class_scores(const ConfusionMatrix& cm, int cls);

// Unweighted mean of the per-class F1 over all seven classes; a class with
// no support and no predictions contributes 0. Throws on an empty matrix.
double macro_f1(const ConfusionMatrix& cm);

// trace / total. Throws on an empty matrix.
double total_accuracy(const ConfusionMatrix& cm);

// 0.67 * f1 + 0.33 * acc. Both inputs must lie in [0, 1].
double e_total(double f1, double acc);

struct MetricReport {
  ConfusionMatrix confusion;
  std::array<ClassScores, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  double total_accuracy = 0.0;
  double e_total = 0.0;
};

MetricReport make_report(const ConfusionMatrix& cm);

// Aligned text table for humans.
std::string render_table(const MetricReport& report, const LabelMap& labels = LabelMap::standard());

// `key: value` lines: macro_f1, total_accuracy, e_total, then per class k
// f1_class_<k>, precision_class_<k>, recall_class_<k>, support_class_<k>,
// and confusion_row_<k> as comma-separated counts.
std::string serialize_report(const MetricReport& report);
MetricReport parse_report(std::string_view text);
void write_report(const std::filesystem::path& path, const MetricReport& report);

// Joins a prediction CSV to the ground truth of every annotation file in
// `annotation_dir` by (video_id, frame). Every valid frame must have a
// prediction; otherwise throws InvalidInputError listing up to ten missing
// keys. Predictions for Invalid or unknown frames are ignored.
MetricReport evaluate_files(const std::filesystem::path& prediction_csv, const std::filesystem::path& annotation_dir);

}  // namespace vfer::metrics
