#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace vfer::models {

enum class BackboneArch { ResNet50, Tiny };

std::string_view arch_name(BackboneArch arch) noexcept;
BackboneArch parse_arch(std::string_view name);

// Frame feature extractor. ResNet50 always yields 2048 features; the tiny
// strided CNN exists for fast desk-scale runs and defaults to 128.
struct BackboneConfig {
  BackboneArch architecture = BackboneArch::ResNet50;
  std::size_t feature_dim = 2048;
  std::string pretrained_weights;  // empty: random initialization

  void validate() const;
  bool operator==(const BackboneConfig&) const = default;
};

enum class HeadKind { Static, Gru, Transformer };

std::string_view head_name(HeadKind kind) noexcept;
HeadKind parse_head(std::string_view name);

struct TemporalHeadConfig {
  HeadKind kind = HeadKind::Static;
  std::size_t gru_layers = 2;
  std::size_t gru_hidden = 512;
  std::size_t tf_model_dim = 512;
  std::size_t tf_heads = 4;
  std::size_t tf_layers = 2;
  std::size_t tf_ffn_dim = 1024;
  double dropout = 0.1;

  void validate() const;
  bool operator==(const TemporalHeadConfig&) const = default;
};

// `key=value;` listing of every field of both configs, in fixed order.
std::string canonical_config(const BackboneConfig& backbone, const TemporalHeadConfig& head);

// 16 hex digits of the 64-bit FNV-1a hash of `text`.
std::string fingerprint_of(std::string_view text);

}  // namespace vfer::models
