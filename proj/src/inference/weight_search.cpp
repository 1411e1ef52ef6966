#include "vfer/inference/weight_search.hpp"

#include <cmath>
#include <map>

#include "vfer/core/errors.hpp"
#include "vfer/metrics/metrics.hpp"

namespace vfer::inference {

namespace {

void enumerate(std::size_t models, std::size_t remaining, std::size_t divisions, std::vector<std::size_t>& current,
               std::vector<std::vector<double>>& out) {
  if (current.size() + 1 == models) {
    current.push_back(remaining);
    std::vector<double> w(models);
    for (std::size_t i = 0; i < models; ++i) {
      w[i] = static_cast<double>(current[i]) / static_cast<double>(divisions);
    }
    out.push_back(std::move(w));
    current.pop_back();
    return;
  }
  for (std::size_t k = remaining + 1; k-- > 0;) {
    current.push_back(k);
    enumerate(models, remaining - k, divisions, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::vector<double>> simplex_grid(std::size_t models, double step) {
  if (models == 0) throw ConfigError("simplex grid over zero models");
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("grid step must lie in (0, 1]");
  const double inv = 1.0 / step;
  const auto divisions = static_cast<std::size_t>(std::llround(inv));
  if (std::abs(inv - static_cast<double>(divisions)) > 1e-9) throw ConfigError("1/step must be an integer");
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> current;
  enumerate(models, divisions, divisions, current, out);
  return out;
}

WeightSearchResult search_ensemble_weights(std::span<const std::vector<PredictionRecord>> per_model,
                                           std::span<const dataio::VideoAnnotation> truth, double step,
                                           EnsembleMode mode) {
  const std::size_t m = per_model.size();
  if (m == 0) throw InvalidInputError("weight search needs at least one model");

  std::vector<std::map<std::pair<std::string, std::size_t>, const ProbVector*>> lookup(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& r : per_model[i]) lookup[i][{r.video_id, r.frame_index}] = &r.probs;
  }

  // Align every valid frame across models once.
  std::vector<int> y_true;
  std::vector<std::vector<ProbVector>> aligned;
  for (const auto& v : truth) {
    for (std::size_t f = 0; f < v.labels.size(); ++f) {
      if (!is_valid_code(v.labels[f])) continue;
      std::vector<ProbVector> row(m);
      for (std::size_t i = 0; i < m; ++i) {
        const auto it = lookup[i].find({v.video_id, f});
        if (it == lookup[i].end()) {
          throw InvalidInputError("model " + std::to_string(i) + " has no prediction for " + v.video_id + "/" +
                                  std::to_string(f));
        }
        row[i] = *it->second;
      }
      y_true.push_back(v.labels[f]);
      aligned.push_back(std::move(row));
    }
  }
  if (y_true.empty()) throw InvalidInputError("weight search split has no valid frames");

  auto score = [&](const std::vector<double>& weights) {
    EnsembleConfig cfg{weights, mode};
    std::vector<int> y_pred(y_true.size());
    for (std::size_t k = 0; k < aligned.size(); ++k) y_pred[k] = predicted_code(ensemble_combine(aligned[k], cfg));
    return metrics::make_report(metrics::confusion_matrix(y_true, y_pred));
  };

  WeightSearchResult result;
  bool first = true;
  for (const auto& w : simplex_grid(m, step)) {
    const auto report = score(w);
    ++result.evaluated;
    if (first || report.e_total > result.e_total) {
      first = false;
      result.weights = w;
      result.e_total = report.e_total;
      result.macro_f1 = report.macro_f1;
      result.total_accuracy = report.total_accuracy;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> vertex(m, 0.0);
    vertex[i] = 1.0;
    result.single_model_e_total.push_back(score(vertex).e_total);
  }
  return result;
}

}  // namespace vfer::inference
