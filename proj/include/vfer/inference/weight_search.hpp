#pragma once

#include <span>
#include <vector>

#include "vfer/dataio/annotation.hpp"
#include "vfer/inference/ensemble.hpp"
#include "vfer/inference/predictions_io.hpp"

namespace vfer::inference {

struct WeightSearchResult {
  std::vector<double> weights;
  double e_total = 0.0;
  double macro_f1 = 0.0;
  double total_accuracy = 0.0;
  std::vector<double> single_model_e_total;  // each model alone (vertex weights)
  std::size_t evaluated = 0;                 // grid points tried
};

// All weight vectors with entries in {0, step, 2 step, ..., 1} summing to 1,
// vertices included, in lexicographically decreasing order of the first
// weights. 1/step must be an integer.
std::vector<std::vector<double>> simplex_grid(std::size_t models, double step);

// Exhaustive search of simplex_grid for the highest E_total over the valid
// frames of `truth`. `per_model[m]` holds model m's predictions for those
// frames. Ties keep the earlier grid point.
WeightSearchResult search_ensemble_weights(std::span<const std::vector<PredictionRecord>> per_model,
                                           std::span<const dataio::VideoAnnotation> truth, double step = 0.05,
                                           EnsembleMode mode = EnsembleMode::Probability);

}  // namespace vfer::inference
