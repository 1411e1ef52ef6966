#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "vfer/core/labels.hpp"

namespace vfer {

// Raw per-class scores for one frame.
struct LogitVector {
  std::array<double, kNumClasses> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const LogitVector&) const = default;
};

// Per-class probabilities for one frame; entries are nonnegative and sum to 1.
struct ProbVector {
  std::array<double, kNumClasses> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const ProbVector&) const = default;
};

// Max-subtracted softmax. Throws InvalidInputError on non-finite input.
ProbVector softmax(const LogitVector& logits);

// In-place max-subtracted softmax over an arbitrary-length row. Assumes
// finite input; used on hot paths where the caller already guarantees it.
void softmax_inplace(std::span<double> row) noexcept;

// log(sum(exp(row))) computed with max subtraction.
double log_sum_exp(std::span<const double> row) noexcept;

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> row) noexcept;

inline int predicted_code(const ProbVector& p) noexcept {
  return static_cast<int>(argmax(p.values));
}

}  // namespace vfer
