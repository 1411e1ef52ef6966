#include "vfer/models/config.hpp"

#include <cstdint>
#include <cstdio>

#include "vfer/core/errors.hpp"

namespace vfer::models {

std::string_view arch_name(BackboneArch arch) noexcept {
  return arch == BackboneArch::ResNet50 ? "resnet50" : "tiny";
}

BackboneArch parse_arch(std::string_view name) {
  if (name == "resnet50") return BackboneArch::ResNet50;
  if (name == "tiny") return BackboneArch::Tiny;
  throw ConfigError("unknown backbone architecture '" + std::string(name) + "' (expected resnet50|tiny)");
}

std::string_view head_name(HeadKind kind) noexcept {
  switch (kind) {
    case HeadKind::Static: return "static";
    case HeadKind::Gru: return "gru";
    case HeadKind::Transformer: return "transformer";
  }
  return "static";
}

HeadKind parse_head(std::string_view name) {
  if (name == "static") return HeadKind::Static;
  if (name == "gru") return HeadKind::Gru;
  if (name == "transformer") return HeadKind::Transformer;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected static|gru|transformer)");
}

void BackboneConfig::validate() const {
  if (feature_dim == 0) throw ConfigError("backbone feature_dim must be positive");
  if (architecture == BackboneArch::ResNet50 && feature_dim != 2048) {
    throw ConfigError("resnet50 backbone produces 2048 features, got feature_dim " + std::to_string(feature_dim));
  }
}

void TemporalHeadConfig::validate() const {
  if (kind == HeadKind::Gru) {
    if (gru_layers != 2) throw ConfigError("the GRU head is two layers deep, got gru_layers " + std::to_string(gru_layers));
    if (gru_hidden == 0) throw ConfigError("gru_hidden must be positive");
  }
  if (kind == HeadKind::Transformer) {
    if (tf_model_dim == 0 || tf_heads == 0 || tf_layers == 0 || tf_ffn_dim == 0) {
      throw ConfigError("transformer widths must be positive");
    }
    if (tf_model_dim % tf_heads != 0) throw ConfigError("tf_model_dim must be divisible by tf_heads");
    if (tf_model_dim % 2 != 0) throw ConfigError("tf_model_dim must be even for sinusoidal positions");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
}

std::string canonical_config(const BackboneConfig& backbone, const TemporalHeadConfig& head) {
  char dropout[64];
  std::snprintf(dropout, sizeof(dropout), "%.17g", head.dropout);
  std::string out;
  out += "backbone.architecture=" + std::string(arch_name(backbone.architecture)) + ";";
  out += "backbone.feature_dim=" + std::to_string(backbone.feature_dim) + ";";
  out += "backbone.pretrained_weights=" + backbone.pretrained_weights + ";";
  out += "head.kind=" + std::string(head_name(head.kind)) + ";";
  out += "head.gru_layers=" + std::to_string(head.gru_layers) + ";";
  out += "head.gru_hidden=" + std::to_string(head.gru_hidden) + ";";
  out += "head.tf_model_dim=" + std::to_string(head.tf_model_dim) + ";";
  out += "head.tf_heads=" + std::to_string(head.tf_heads) + ";";
  out += "head.tf_layers=" + std::to_string(head.tf_layers) + ";";
  out += "head.tf_ffn_dim=" + std::to_string(head.tf_ffn_dim) + ";";
  out += "head.dropout=" + std::string(dropout) + ";";
  return out;
}

std::string fingerprint_of(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace vfer::models
