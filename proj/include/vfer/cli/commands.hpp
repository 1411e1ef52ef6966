#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vfer/cli/run_config.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/inference/predictions_io.hpp"
#include "vfer/inference/weight_search.hpp"
#include "vfer/metrics/metrics.hpp"
#include "vfer/models/config.hpp"
#include "vfer/training/trainer.hpp"

namespace vfer::cli {

enum class ExitCode { Ok = 0, RuntimeError = 1, UsageError = 2 };

// Thrown for bad command lines; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// "static", "gru", "transformer" or "all" (nullopt).
std::optional<models::HeadKind> parse_model_selector(const std::string& text);

// Ensemble order: static, gru, transformer.
const std::vector<models::HeadKind>& ensemble_models();

// Output layout under paths.output_dir.
std::filesystem::path model_dir(const RunConfig& config, models::HeadKind kind);
std::filesystem::path predictions_path(const RunConfig& config, const std::string& name);

// Builds an untrained model of `kind` from the config, loading pretrained
// backbone weights when configured.
models::ModelBundle build_model(const RunConfig& config, models::HeadKind kind);

// Writes both splits and their manifests.
void command_synth(const RunConfig& config, std::ostream& log);

// Trains one model on the train split, validating on the eval split.
// Writes config.echo, metrics.log, last.ckpt and best.ckpt to model_dir.
training::FitResult command_train(const RunConfig& config, models::HeadKind kind, std::ostream& log,
                                  bool resume = false, bool allow_mismatch = false);

// Per-model prediction CSVs for the eval split (one row per valid frame),
// plus the ensemble CSV when all models are selected.
void command_predict(const RunConfig& config, std::optional<models::HeadKind> kind, std::ostream& log);

// Scores predictions_<name>.csv against the eval split and writes
// report_<name>.txt.
metrics::MetricReport command_evaluate(const RunConfig& config, const std::string& name, std::ostream& log);

// Grid search over ensemble weights on the eval split; writes
// ensemble_search.txt.
inference::WeightSearchResult command_ensemble_search(const RunConfig& config, std::ostream& log);

// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vfer::cli
