#include "vfer/metrics/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "vfer/core/errors.hpp"
#include "vfer/dataio/annotation.hpp"
#include "vfer/inference/predictions_io.hpp"

namespace vfer::metrics {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::uint64_t ConfusionMatrix::correct() const noexcept {
  std::uint64_t n = 0;
  for (int c = 0; c < kNumClasses; ++c) n += counts[c][c];
  return n;
}

std::uint64_t ConfusionMatrix::true_positives(int cls) const noexcept { return counts[cls][cls]; }

std::uint64_t ConfusionMatrix::false_positives(int cls) const noexcept {
  std::uint64_t n = 0;
  for (int t = 0; t < kNumClasses; ++t) {
    if (t != cls) n += counts[t][cls];
  }
  return n;
}

std::uint64_t ConfusionMatrix::false_negatives(int cls) const noexcept {
  std::uint64_t n = 0;
  for (int p = 0; p < kNumClasses; ++p) {
    if (p != cls) n += counts[cls][p];
  }
  return n;
}

std::uint64_t ConfusionMatrix::support(int cls) const noexcept {
  return true_positives(cls) + false_negatives(cls);
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw InvalidInputError("confusion_matrix: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (!is_valid_code(y_pred[i])) {
      throw InvalidInputError("confusion_matrix: prediction " + std::to_string(y_pred[i]) + " at position " +
                              std::to_string(i) + " is not a class");
    }
    if (y_true[i] == kInvalidCode) continue;
    if (!is_valid_code(y_true[i])) throw InvalidInputError("confusion_matrix: bad true label " + std::to_string(y_true[i]));
    ++cm.counts[y_true[i]][y_pred[i]];
  }
  return cm;
}

ClassScores class_scores(const ConfusionMatrix& cm, int cls) {
  ClassScores s;
  const auto tp = cm.true_positives(cls);
  s.precision = ratio(tp, tp + cm.false_positives(cls));
  s.recall = ratio(tp, tp + cm.false_negatives(cls));
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  s.support = cm.support(cls);
  return s;
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidInputError("macro_f1 of an empty confusion matrix");
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) sum += class_scores(cm, c).f1;
  return sum / kNumClasses;
}

double total_accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidInputError("total_accuracy of an empty confusion matrix");
  return ratio(cm.correct(), cm.total());
}

double e_total(double f1, double acc) {
  if (!(f1 >= 0.0 && f1 <= 1.0) || !(acc >= 0.0 && acc <= 1.0)) {
    throw InvalidInputError("e_total inputs must lie in [0, 1]");
  }
  return 0.67 * f1 + 0.33 * acc;
}

MetricReport make_report(const ConfusionMatrix& cm) {
  MetricReport r;
  r.confusion = cm;
  for (int c = 0; c < kNumClasses; ++c) r.per_class[c] = class_scores(cm, c);
  r.macro_f1 = macro_f1(cm);
  r.total_accuracy = total_accuracy(cm);
  r.e_total = e_total(r.macro_f1, r.total_accuracy);
  return r;
}

std::string render_table(const MetricReport& report, const LabelMap& labels) {
  std::string out = fmt::format("{:>10}  {:>9}  {:>6}  {:>6}  {:>7}\n", "class", "precision", "recall", "f1", "support");
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& s = report.per_class[c];
    out += fmt::format("{:>10}  {:>9.4f}  {:>6.4f}  {:>6.4f}  {:>7}\n", label_name(labels.decode(c)), s.precision,
                       s.recall, s.f1, s.support);
  }
  out += fmt::format("\nmacro F1        {:.4f}\ntotal accuracy  {:.4f}\nE_total         {:.4f}\n", report.macro_f1,
                     report.total_accuracy, report.e_total);
  return out;
}

std::string serialize_report(const MetricReport& report) {
  std::string out;
  out += "macro_f1: " + format_double(report.macro_f1) + "\n";
  out += "total_accuracy: " + format_double(report.total_accuracy) + "\n";
  out += "e_total: " + format_double(report.e_total) + "\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& s = report.per_class[c];
    const auto k = std::to_string(c);
    out += "f1_class_" + k + ": " + format_double(s.f1) + "\n";
    out += "precision_class_" + k + ": " + format_double(s.precision) + "\n";
    out += "recall_class_" + k + ": " + format_double(s.recall) + "\n";
    out += "support_class_" + k + ": " + std::to_string(s.support) + "\n";
  }
  for (int t = 0; t < kNumClasses; ++t) {
    out += "confusion_row_" + std::to_string(t) + ": ";
    for (int p = 0; p < kNumClasses; ++p) {
      if (p > 0) out += ",";
      out += std::to_string(report.confusion.counts[t][p]);
    }
    out += "\n";
  }
  return out;
}

MetricReport parse_report(std::string_view text) {
  // The confusion matrix is authoritative; everything else is recomputed
  // from it and cross-checked against the stored headline numbers.
  ConfusionMatrix cm;
  std::map<std::string, std::string> values;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto sep = line.find(": ");
    if (sep == std::string::npos) throw ParseError("expected 'key: value'", line_no);
    values[line.substr(0, sep)] = line.substr(sep + 2);
  }
  for (int t = 0; t < kNumClasses; ++t) {
    const auto it = values.find("confusion_row_" + std::to_string(t));
    if (it == values.end()) throw ParseError("missing confusion_row_" + std::to_string(t));
    std::istringstream row(it->second);
    std::string cell;
    for (int p = 0; p < kNumClasses; ++p) {
      if (!std::getline(row, cell, ',')) throw ParseError("short confusion row " + std::to_string(t));
      cm.counts[t][p] = std::stoull(cell);
    }
  }
  MetricReport report = make_report(cm);
  for (const char* key : {"macro_f1", "e_total", "total_accuracy"}) {
    if (values.find(key) == values.end()) throw ParseError(std::string("missing ") + key);
  }
  if (values["macro_f1"] != format_double(report.macro_f1) || values["e_total"] != format_double(report.e_total) ||
      values["total_accuracy"] != format_double(report.total_accuracy)) {
    throw ParseError("stored metrics disagree with the confusion matrix");
  }
  return report;
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_report(report);
  if (!out) throw IoError("write failed: " + path.string());
}

MetricReport evaluate_files(const std::filesystem::path& prediction_csv, const std::filesystem::path& annotation_dir) {
  const auto rows = inference::read_predictions(prediction_csv);
  std::map<std::pair<std::string, std::size_t>, int> predicted;
  for (const auto& r : rows) predicted[{r.video_id, r.frame_index}] = r.predicted;

  const auto videos = dataio::load_annotation_split(annotation_dir, {});
  std::vector<int> y_true;
  std::vector<int> y_pred;
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (const auto& v : videos) {
    for (std::size_t f = 0; f < v.labels.size(); ++f) {
      if (!is_valid_code(v.labels[f])) continue;
      const auto it = predicted.find({v.video_id, f});
      if (it == predicted.end()) {
        if (missing.size() < 10) missing.push_back(v.video_id + "/" + std::to_string(f));
        ++missing_count;
        continue;
      }
      y_true.push_back(v.labels[f]);
      y_pred.push_back(it->second);
    }
  }
  if (missing_count > 0) {
    std::string msg = std::to_string(missing_count) + " annotated frames have no prediction:";
    for (const auto& m : missing) msg += " " + m;
    if (missing_count > missing.size()) msg += " ...";
    throw InvalidInputError(msg);
  }
  return make_report(confusion_matrix(y_true, y_pred));
}

}  // namespace vfer::metrics
