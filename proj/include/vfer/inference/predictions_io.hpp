#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vfer/core/numeric.hpp"

namespace vfer::inference {

struct PredictionRecord {
  std::string video_id;
  std::size_t frame_index = 0;
  std::vector<ProbVector> model_probs;  // per model, in ensemble order; may be empty
  ProbVector probs;                     // the distribution written to disk
  int predicted = 0;                    // argmax of `probs`, ties to the lowest code

  static PredictionRecord make(std::string video_id, std::size_t frame, const ProbVector& probs);
};

// CSV, header `video_id,frame,pred,prob_0,...,prob_6`, probabilities with 9
// significant digits. Records must be strictly increasing in
// (video_id, frame_index); otherwise InvalidInputError.
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records);
std::string format_predictions(std::span<const PredictionRecord> records);

// Reads a file produced by write_predictions. `model_probs` stays empty.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::string_view text);

}  // namespace vfer::inference
