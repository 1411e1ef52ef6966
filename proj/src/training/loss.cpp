#include "vfer/training/loss.hpp"

#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"
#include "vfer/core/numeric.hpp"

namespace vfer::training {

LossResult masked_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 3 || logits.dim(2) != kNumClasses) {
    throw InvalidInputError("expected (B, T, 7) logits, got " + shape_string(logits.shape()));
  }
  const std::size_t rows = logits.dim(0) * logits.dim(1);
  if (labels.size() != rows) {
    throw InvalidInputError("label count " + std::to_string(labels.size()) + " does not match " +
                            std::to_string(rows) + " frames");
  }
  LossResult result;
  for (int y : labels) {
    if (y == kInvalidCode) continue;
    if (!is_valid_code(y)) throw InvalidInputError("bad label code " + std::to_string(y));
    ++result.valid_frames;
  }
  if (result.valid_frames == 0) throw NoValidTargetError("batch has no frame with a valid label");
  if (!logits.all_finite()) throw InvalidInputError("non-finite logits");

  result.grad = Tensor(logits.shape());
  const double scale = 1.0 / static_cast<double>(result.valid_frames);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = labels[r];
    if (y == kInvalidCode) continue;
    const std::span<const double> row(logits.data() + r * kNumClasses, kNumClasses);
    total += log_sum_exp(row) - row[y];
    std::span<double> g(result.grad.data() + r * kNumClasses, kNumClasses);
    std::copy(row.begin(), row.end(), g.begin());
    softmax_inplace(g);
    g[y] -= 1.0;
    for (double& v : g) v *= scale;
  }
  result.value = total * scale;
  return result;
}

}  // namespace vfer::training
