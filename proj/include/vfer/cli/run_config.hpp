#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "vfer/dataio/synthetic.hpp"
#include "vfer/inference/ensemble.hpp"
#include "vfer/models/config.hpp"
#include "vfer/training/train_config.hpp"

namespace vfer::cli {

struct PathConfig {
  std::filesystem::path frames_root;
  std::filesystem::path annotations_root;
  std::filesystem::path output_dir;
  std::filesystem::path label_map;  // empty: standard coding
};

struct DataConfig {
  std::string train_split = "Train_Set";
  std::string eval_split = "Validation_Set";
};

// Parameters of the `synth` command. Train and eval splits share the spec
// except for the video count, id prefix and seed.
struct SynthConfig {
  dataio::SyntheticSpec spec;
  std::size_t eval_videos = 14;
  std::uint64_t seed = 0;
};

struct RunConfig {
  PathConfig paths;
  DataConfig data;
  training::TrainConfig train;
  models::BackboneConfig backbone;
  // `kind` is chosen per command with --model; the rest applies to every head.
  models::TemporalHeadConfig head;
  inference::EnsembleConfig ensemble;
  double ensemble_search_step = 0.05;
  SynthConfig synth;
  bool deterministic = false;

  // Field-level checks; path existence is checked per command.
  void validate() const;

  std::filesystem::path train_annotations() const { return paths.annotations_root / data.train_split; }
  std::filesystem::path eval_annotations() const { return paths.annotations_root / data.eval_split; }
};

// Text format: one `section.key: value` per line; `#` starts a comment;
// blank lines ignored. A bare key is accepted when exactly one section
// defines it. Lists are comma-separated, optionally in brackets. Unknown or
// repeated keys and malformed values raise ConfigError naming the key and,
// for values, the expected type. Missing keys keep their defaults.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

// Every key with its current value; parse_config_text(serialize_config(c))
// reproduces `c` exactly.
std::string serialize_config(const RunConfig& config);

}  // namespace vfer::cli
