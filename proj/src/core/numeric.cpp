#include "vfer/core/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "vfer/core/errors.hpp"

namespace vfer {

ProbVector softmax(const LogitVector& logits) {
  for (double v : logits.values) {
    if (!std::isfinite(v)) throw InvalidInputError("softmax: non-finite logit");
  }
  ProbVector out;
  out.values = logits.values;
  softmax_inplace(out.values);
  return out;
}

void softmax_inplace(std::span<double> row) noexcept {
  if (row.empty()) return;
  const double peak = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : row) v /= total;
}

double log_sum_exp(std::span<const double> row) noexcept {
  const double peak = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double v : row) total += std::exp(v - peak);
  return peak + std::log(total);
}

std::size_t argmax(std::span<const double> row) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace vfer
