#include "vfer/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "vfer/core/errors.hpp"

namespace vfer::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a nonnegative integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a real number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "boolean (true or false)");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::string body = v;
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  if (trim(body).empty()) return out;
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field integer_field(T RunConfig::*section, std::size_t T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) {
            (c.*section).*member = parse_integer<std::size_t>(k, v);
          },
          [=](const RunConfig& c) { return std::to_string((c.*section).*member); }};
}

template <typename T>
Field real_field(T RunConfig::*section, double T::*member) {
  return {[=](RunConfig& c, const std::string& k, const std::string& v) { (c.*section).*member = parse_real(k, v); },
          [=](const RunConfig& c) { return real((c.*section).*member); }};
}

template <typename T, typename S>
Field string_field(T RunConfig::*section, S T::*member) {
  return {[=](RunConfig& c, const std::string&, const std::string& v) { (c.*section).*member = v; },
          [=](const RunConfig& c) { return S((c.*section).*member).string(); }};
}

// Ordered table of every key; serialization follows this order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto path_field = [](std::filesystem::path PathConfig::*m) {
      return Field{[=](RunConfig& c, const std::string&, const std::string& v) { c.paths.*m = v; },
                   [=](const RunConfig& c) { return (c.paths.*m).string(); }};
    };
    auto text_field = [](std::string DataConfig::*m) {
      return Field{[=](RunConfig& c, const std::string&, const std::string& v) { c.data.*m = v; },
                   [=](const RunConfig& c) { return c.data.*m; }};
    };
    t.emplace_back("paths.frames_root", path_field(&PathConfig::frames_root));
    t.emplace_back("paths.annotations_root", path_field(&PathConfig::annotations_root));
    t.emplace_back("paths.output_dir", path_field(&PathConfig::output_dir));
    t.emplace_back("paths.label_map", path_field(&PathConfig::label_map));
    t.emplace_back("data.train_split", text_field(&DataConfig::train_split));
    t.emplace_back("data.eval_split", text_field(&DataConfig::eval_split));

    using TC = training::TrainConfig;
    t.emplace_back("train.base_lr", real_field(&RunConfig::train, &TC::base_lr));
    t.emplace_back("train.epochs", integer_field(&RunConfig::train, &TC::epochs));
    t.emplace_back("train.milestones",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.train.milestones.clear();
                           for (const auto& item : parse_list(v)) {
                             c.train.milestones.push_back(parse_integer<std::size_t>(k, item));
                           }
                         },
                         [](const RunConfig& c) {
                           return join<std::size_t>(c.train.milestones,
                                                    [](const std::size_t& m) { return std::to_string(m); });
                         }});
    t.emplace_back("train.lr_gamma", real_field(&RunConfig::train, &TC::lr_gamma));
    t.emplace_back("train.batch_size", integer_field(&RunConfig::train, &TC::batch_size));
    t.emplace_back("train.seed", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                         c.train.seed = parse_integer<std::uint64_t>(k, v);
                                       },
                                       [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    t.emplace_back("train.window_T", integer_field(&RunConfig::train, &TC::window_T));
    t.emplace_back("train.stride", integer_field(&RunConfig::train, &TC::stride));
    t.emplace_back("train.optimizer", Field{[](RunConfig& c, const std::string&, const std::string& v) {
                                              c.train.optimizer = v;
                                            },
                                            [](const RunConfig& c) { return c.train.optimizer; }});
    t.emplace_back("train.momentum", real_field(&RunConfig::train, &TC::momentum));

    using BC = models::BackboneConfig;
    t.emplace_back("backbone.architecture",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           try {
                             c.backbone.architecture = models::parse_arch(v);
                           } catch (const Error&) {
                             bad_value(k, v, "resnet50 or tiny");
                           }
                         },
                         [](const RunConfig& c) { return std::string(models::arch_name(c.backbone.architecture)); }});
    t.emplace_back("backbone.feature_dim", integer_field(&RunConfig::backbone, &BC::feature_dim));
    t.emplace_back("backbone.pretrained_weights",
                   Field{[](RunConfig& c, const std::string&, const std::string& v) { c.backbone.pretrained_weights = v; },
                         [](const RunConfig& c) { return c.backbone.pretrained_weights; }});

    using HC = models::TemporalHeadConfig;
    t.emplace_back("head.gru_layers", integer_field(&RunConfig::head, &HC::gru_layers));
    t.emplace_back("head.gru_hidden", integer_field(&RunConfig::head, &HC::gru_hidden));
    t.emplace_back("head.tf_model_dim", integer_field(&RunConfig::head, &HC::tf_model_dim));
    t.emplace_back("head.tf_heads", integer_field(&RunConfig::head, &HC::tf_heads));
    t.emplace_back("head.tf_layers", integer_field(&RunConfig::head, &HC::tf_layers));
    t.emplace_back("head.tf_ffn_dim", integer_field(&RunConfig::head, &HC::tf_ffn_dim));
    t.emplace_back("head.dropout", real_field(&RunConfig::head, &HC::dropout));

    t.emplace_back("ensemble.weights",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.ensemble.weights.clear();
                           for (const auto& item : parse_list(v)) c.ensemble.weights.push_back(parse_real(k, item));
                         },
                         [](const RunConfig& c) {
                           return join<double>(c.ensemble.weights, [](const double& w) { return real(w); });
                         }});
    t.emplace_back("ensemble.mode", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                            try {
                                              c.ensemble.mode = inference::parse_mode(v);
                                            } catch (const Error&) {
                                              bad_value(k, v, "prob or logit");
                                            }
                                          },
                                          [](const RunConfig& c) {
                                            return std::string(inference::mode_name(c.ensemble.mode));
                                          }});
    t.emplace_back("ensemble.search_step",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.ensemble_search_step = parse_real(k, v);
                         },
                         [](const RunConfig& c) { return real(c.ensemble_search_step); }});

    auto synth_size = [](std::size_t dataio::SyntheticSpec::*m) {
      return Field{[=](RunConfig& c, const std::string& k, const std::string& v) {
                     c.synth.spec.*m = parse_integer<std::size_t>(k, v);
                   },
                   [=](const RunConfig& c) { return std::to_string(c.synth.spec.*m); }};
    };
    auto synth_real = [](double dataio::SyntheticSpec::*m) {
      return Field{[=](RunConfig& c, const std::string& k, const std::string& v) { c.synth.spec.*m = parse_real(k, v); },
                   [=](const RunConfig& c) { return real(c.synth.spec.*m); }};
    };
    t.emplace_back("synth.num_videos", synth_size(&dataio::SyntheticSpec::num_videos));
    t.emplace_back("synth.eval_videos", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                                c.synth.eval_videos = parse_integer<std::size_t>(k, v);
                                              },
                                              [](const RunConfig& c) { return std::to_string(c.synth.eval_videos); }});
    t.emplace_back("synth.frames_per_video", synth_size(&dataio::SyntheticSpec::frames_per_video));
    t.emplace_back("synth.image_size", synth_size(&dataio::SyntheticSpec::image_size));
    t.emplace_back("synth.motion_classes",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                           c.synth.spec.motion_classes.clear();
                           for (const auto& item : parse_list(v)) {
                             c.synth.spec.motion_classes.push_back(parse_integer<int>(k, item));
                           }
                         },
                         [](const RunConfig& c) {
                           return join<int>(c.synth.spec.motion_classes, [](const int& m) { return std::to_string(m); });
                         }});
    t.emplace_back("synth.noise_level", synth_real(&dataio::SyntheticSpec::noise_level));
    t.emplace_back("synth.invalid_fraction", synth_real(&dataio::SyntheticSpec::invalid_fraction));
    t.emplace_back("synth.seed", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                         c.synth.seed = parse_integer<std::uint64_t>(k, v);
                                       },
                                       [](const RunConfig& c) { return std::to_string(c.synth.seed); }});

    t.emplace_back("run.deterministic",
                   Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); },
                         [](const RunConfig& c) { return std::string(c.deterministic ? "true" : "false"); }});
    return t;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

std::string resolve_key(const std::string& key) {
  if (key.find('.') != std::string::npos) return key;
  std::vector<std::string> matches;
  for (const auto& [name, field] : fields()) {
    if (name.substr(name.find('.') + 1) == key) matches.push_back(name);
  }
  if (matches.size() == 1) return matches.front();
  if (matches.size() > 1) throw ConfigError("ambiguous config key '" + key + "'; use a section prefix");
  return key;
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  backbone.validate();
  head.validate();
  if (ensemble.weights.size() != inference::kEnsembleModels) {
    throw ConfigError("ensemble.weights needs exactly 3 entries (static, gru, transformer)");
  }
  ensemble.validate();
  if (!(ensemble_search_step > 0.0 && ensemble_search_step <= 1.0)) {
    throw ConfigError("ensemble.search_step must lie in (0, 1]");
  }
  synth.spec.validate();
  if (data.train_split.empty() || data.eval_split.empty()) throw ConfigError("split names must be nonempty");
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key: value'");
    }
    const std::string key = resolve_key(trim(line.substr(0, colon)));
    const std::string value = trim(line.substr(colon + 1));
    const Field* field = find_field(key);
    if (field == nullptr) throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(line_no));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    field->set(config, key, value);
  }
  config.validate();
  // Materialize normalized weights so the echo re-parses to the same values.
  config.ensemble = config.ensemble.normalized();
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, field] : fields()) {
    const std::string this_section = name.substr(0, name.find('.'));
    if (this_section != section) {
      if (!section.empty()) out += "\n";
      section = this_section;
    }
    out += name + ": " + field.get(config) + "\n";
  }
  return out;
}

}  // namespace vfer::cli
