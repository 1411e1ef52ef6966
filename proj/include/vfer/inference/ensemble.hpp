#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfer/core/numeric.hpp"

namespace vfer::inference {

enum class EnsembleMode {
  Probability,  // weighted mean of probabilities
  Logit,        // softmax of the weighted mean of log-probabilities
};

std::string_view mode_name(EnsembleMode mode) noexcept;
EnsembleMode parse_mode(std::string_view text);

inline constexpr std::size_t kEnsembleModels = 3;  // static, gru, transformer

struct EnsembleConfig {
  std::vector<double> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  EnsembleMode mode = EnsembleMode::Probability;

  // Nonnegative, finite, at least one positive. Throws ConfigError.
  void validate() const;
  // Copy with weights rescaled to sum to 1; weights already within 1e-12 of
  // unit sum are kept as given.
  EnsembleConfig normalized() const;
};

// Combines one distribution per model. Terms are accumulated in a canonical
// order, so permuting (model, weight) pairs together never changes a bit,
// and each entry is clamped to the range spanned by the inputs to absorb
// rounding. Throws InvalidInputError if the weight count differs from the
// number of inputs.
ProbVector ensemble_combine(std::span<const ProbVector> probs, const EnsembleConfig& config);

}  // namespace vfer::inference
