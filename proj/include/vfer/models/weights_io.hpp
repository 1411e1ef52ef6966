#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vfer/core/tensor.hpp"
#include "vfer/models/model.hpp"

namespace vfer::models {

// Container of named arrays plus string metadata. On disk, little-endian:
//
//   magic    8 bytes  "VFERWTS1"
//   u32      metadata entry count, then per entry:
//              u32 key length, key bytes, u32 value length, value bytes
//   u32      array count, then per array:
//              u32 name length, name bytes, u32 rank, u64 dims[rank],
//              f64 values[prod(dims)] in row-major order
struct WeightFile {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> arrays;

  const Tensor* find(const std::string& name) const;
};

void write_weight_file(const std::filesystem::path& path, const WeightFile& file);
WeightFile read_weight_file(const std::filesystem::path& path);

// Outcome of loading externally pretrained backbone weights.
struct LoadReport {
  std::size_t matched = 0;
  std::vector<std::string> missing;  // backbone arrays absent from the file
  std::vector<std::string> skipped;  // file arrays ignored (classifier, bookkeeping, unknown)
};

// Names of the pretrained network's classifier; never loaded.
bool is_classifier_array(const std::string& name) noexcept;

// Copies every array whose name matches a backbone parameter (torchvision
// naming, no prefix). The classifier (`fc.*`) is always skipped so the head
// starts fresh. Throws LoadError naming the first array whose shape differs.
LoadReport load_backbone_weights(ModelBundle& model, const std::filesystem::path& path);
void save_backbone_weights(ModelBundle& model, const std::filesystem::path& path);

// Full model: every parameter, with the config fingerprint in the header.
WeightFile model_weights(ModelBundle& model);
void save_model_weights(ModelBundle& model, const std::filesystem::path& path);
// Throws FingerprintMismatchError unless the stored fingerprint matches the
// model's, or `ignore_fingerprint` is set.
void load_model_weights(ModelBundle& model, const std::filesystem::path& path, bool ignore_fingerprint = false);
// Copies matching `backbone.`/`head.` arrays from an in-memory container.
void assign_model_weights(ModelBundle& model, const WeightFile& file);

}  // namespace vfer::models
