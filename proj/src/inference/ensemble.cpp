#include "vfer/inference/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "vfer/core/errors.hpp"

namespace vfer::inference {

std::string_view mode_name(EnsembleMode mode) noexcept {
  return mode == EnsembleMode::Logit ? "logit" : "prob";
}

EnsembleMode parse_mode(std::string_view text) {
  if (text == "prob") return EnsembleMode::Probability;
  if (text == "logit") return EnsembleMode::Logit;
  throw ConfigError("ensemble mode must be 'prob' or 'logit', got '" + std::string(text) + "'");
}

void EnsembleConfig::validate() const {
  if (weights.empty()) throw ConfigError("ensemble needs at least one weight");
  bool any_positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("ensemble weights must be finite and nonnegative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ConfigError("at least one ensemble weight must be positive");
}

EnsembleConfig EnsembleConfig::normalized() const {
  validate();
  EnsembleConfig out = *this;
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& w : out.weights) w /= sum;
  }
  return out;
}

ProbVector ensemble_combine(std::span<const ProbVector> probs, const EnsembleConfig& config) {
  if (probs.size() != config.weights.size()) {
    throw InvalidInputError("ensemble got " + std::to_string(probs.size()) + " distributions for " +
                            std::to_string(config.weights.size()) + " weights");
  }
  if (probs.empty()) throw InvalidInputError("ensemble of zero models");
  const auto& w = config.weights;
  const std::size_t m = probs.size();
  std::vector<double> terms(m);

  ProbVector out;
  for (int c = 0; c < kNumClasses; ++c) {
    double lo = probs[0][c];
    double hi = probs[0][c];
    for (std::size_t i = 0; i < m; ++i) {
      lo = std::min(lo, probs[i][c]);
      hi = std::max(hi, probs[i][c]);
      if (config.mode == EnsembleMode::Probability) {
        terms[i] = w[i] * probs[i][c];
      } else {
        terms[i] = w[i] == 0.0 ? 0.0 : w[i] * std::log(probs[i][c]);
      }
    }
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    out[c] = config.mode == EnsembleMode::Probability ? std::clamp(sum, lo, hi) : sum;
  }
  if (config.mode == EnsembleMode::Logit) {
    // Geometric pooling; a class some weighted model rules out stays at 0.
    double top = -INFINITY;
    for (double v : out.values) top = std::max(top, v);
    if (!std::isfinite(top)) throw InvalidInputError("logit ensemble: every class has zero probability");
    double total = 0.0;
    for (double& v : out.values) {
      v = std::exp(v - top);
      total += v;
    }
    for (double& v : out.values) v /= total;
  }
  return out;
}

}  // namespace vfer::inference
