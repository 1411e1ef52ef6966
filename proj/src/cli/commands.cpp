#include "vfer/cli/commands.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "vfer/core/random.hpp"
#include "vfer/dataio/annotation.hpp"
#include "vfer/dataio/frame_store.hpp"
#include "vfer/dataio/synthetic.hpp"
#include "vfer/inference/ensemble.hpp"
#include "vfer/inference/predict.hpp"
#include "vfer/models/weights_io.hpp"

namespace vfer::cli {

namespace fs = std::filesystem;

namespace {

void require_dir(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " is not set");
  if (!fs::is_directory(path)) throw ConfigError(std::string(what) + " does not exist: " + path.string());
}

void require_data(const RunConfig& config) {
  require_dir(config.paths.frames_root, "paths.frames_root");
  require_dir(config.paths.annotations_root, "paths.annotations_root");
  if (config.paths.output_dir.empty()) throw ConfigError("paths.output_dir is not set");
  if (!config.paths.label_map.empty() && !fs::is_regular_file(config.paths.label_map)) {
    throw ConfigError("paths.label_map does not exist: " + config.paths.label_map.string());
  }
}

LabelMap label_map(const RunConfig& config) {
  return config.paths.label_map.empty() ? LabelMap::standard() : LabelMap::load(config.paths.label_map);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string model_name(models::HeadKind kind) { return std::string(models::head_name(kind)); }

models::ModelBundle load_trained(const RunConfig& config, models::HeadKind kind) {
  const fs::path ckpt = model_dir(config, kind) / "best.ckpt";
  if (!fs::is_regular_file(ckpt)) {
    throw IoError("no trained " + model_name(kind) + " model at " + ckpt.string() + "; run train first");
  }
  models::TemporalHeadConfig head = config.head;
  head.kind = kind;
  models::ModelBundle model(config.backbone, head, config.train.seed);
  models::load_model_weights(model, ckpt);
  return model;
}

}  // namespace

std::optional<models::HeadKind> parse_model_selector(const std::string& text) {
  if (text == "all") return std::nullopt;
  try {
    return models::parse_head(text);
  } catch (const Error&) {
    throw UsageError("--model must be static, gru, transformer or all; got '" + text + "'");
  }
}

const std::vector<models::HeadKind>& ensemble_models() {
  static const std::vector<models::HeadKind> kinds{models::HeadKind::Static, models::HeadKind::Gru,
                                                   models::HeadKind::Transformer};
  return kinds;
}

fs::path model_dir(const RunConfig& config, models::HeadKind kind) {
  return config.paths.output_dir / model_name(kind);
}

fs::path predictions_path(const RunConfig& config, const std::string& name) {
  return config.paths.output_dir / ("predictions_" + name + ".csv");
}

models::ModelBundle build_model(const RunConfig& config, models::HeadKind kind) {
  models::TemporalHeadConfig head = config.head;
  head.kind = kind;
  models::ModelBundle model(config.backbone, head, config.train.seed);
  if (!config.backbone.pretrained_weights.empty()) {
    models::load_backbone_weights(model, config.backbone.pretrained_weights);
  }
  return model;
}

void command_synth(const RunConfig& config, std::ostream& log) {
  if (config.paths.frames_root.empty() || config.paths.annotations_root.empty()) {
    throw ConfigError("synth needs paths.frames_root and paths.annotations_root");
  }
  const auto& spec = config.synth.spec;
  auto train = dataio::generate_synthetic_dataset(spec, config.synth.seed, config.paths.frames_root,
                                                  config.train_annotations());
  dataio::write_manifest(config.paths.annotations_root / (config.data.train_split + "_manifest.csv"), train);

  dataio::SyntheticSpec eval_spec = spec;
  eval_spec.num_videos = config.synth.eval_videos;
  eval_spec.id_prefix = spec.id_prefix + "_eval";
  auto eval = dataio::generate_synthetic_dataset(eval_spec, derive_seed(config.synth.seed, 1),
                                                 config.paths.frames_root, config.eval_annotations());
  dataio::write_manifest(config.paths.annotations_root / (config.data.eval_split + "_manifest.csv"), eval);
  fmt::print(log, "synth: {} train and {} eval videos of {} frames under {}\n", train.size(), eval.size(),
             spec.frames_per_video, config.paths.frames_root.string());
}

training::FitResult command_train(const RunConfig& config, models::HeadKind kind, std::ostream& log, bool resume,
                                  bool allow_mismatch) {
  require_data(config);
  const fs::path dir = model_dir(config, kind);
  fs::create_directories(dir);
  const std::string echo = serialize_config(config);
  write_text(dir / "config.echo", echo);
  fmt::print(log, "config:\n{}\n", echo);

  const auto train = dataio::load_annotation_split(config.train_annotations(), config.paths.frames_root);
  const auto eval = dataio::load_annotation_split(config.eval_annotations(), config.paths.frames_root);
  if (train.empty()) throw InvalidInputError("no annotation files in " + config.train_annotations().string());

  models::ModelBundle model = build_model(config, kind);
  dataio::FrameStore frames(config.paths.frames_root);
  training::FitOptions options;
  options.output_dir = dir;
  options.validation = eval;
  options.allow_fingerprint_mismatch = allow_mismatch;
  if (resume) {
    options.resume_from = dir / "last.ckpt";
    if (!fs::is_regular_file(options.resume_from)) throw IoError("nothing to resume: " + options.resume_from.string());
  }
  options.on_epoch = [&](const training::EpochRecord& r) {
    fmt::print(log, "[{}] {}\n", model_name(kind), training::format_epoch_record(r));
    log.flush();
  };
  options.on_warning = [&](const std::string& message) { fmt::print(log, "[{}] warning: {}\n", model_name(kind), message); };
  if (!resume) fs::remove(dir / "metrics.log");
  fmt::print(log, "training {} on {} videos ({} parameters arrays, fingerprint {})\n", model_name(kind),
             train.size(), model.parameters().size(), model.fingerprint());
  return training::fit(model, train, frames, config.train, options);
}

void command_predict(const RunConfig& config, std::optional<models::HeadKind> kind, std::ostream& log) {
  require_data(config);
  fs::create_directories(config.paths.output_dir);
  const auto videos = dataio::load_annotation_split(config.eval_annotations(), config.paths.frames_root);
  if (videos.empty()) throw InvalidInputError("no annotation files in " + config.eval_annotations().string());

  std::vector<models::HeadKind> kinds = kind ? std::vector<models::HeadKind>{*kind} : ensemble_models();
  dataio::FrameStore frames(config.paths.frames_root);
  std::vector<std::vector<inference::PredictionRecord>> per_model(kinds.size());
  for (std::size_t m = 0; m < kinds.size(); ++m) {
    auto model = load_trained(config, kinds[m]);
    for (const auto& v : videos) {
      const auto probs = inference::predict_video(model, v, frames, config.train.window_T);
      for (std::size_t f = 0; f < v.labels.size(); ++f) {
        if (!is_valid_code(v.labels[f])) continue;
        per_model[m].push_back(inference::PredictionRecord::make(v.video_id, f, probs[f]));
      }
    }
    const auto path = predictions_path(config, model_name(kinds[m]));
    inference::write_predictions(path, per_model[m]);
    fmt::print(log, "predict: {} rows -> {}\n", per_model[m].size(), path.string());
  }
  if (kind) return;

  std::vector<inference::PredictionRecord> ensemble;
  std::vector<ProbVector> probs(kinds.size());
  for (std::size_t r = 0; r < per_model[0].size(); ++r) {
    for (std::size_t m = 0; m < kinds.size(); ++m) probs[m] = per_model[m][r].probs;
    auto record = inference::PredictionRecord::make(per_model[0][r].video_id, per_model[0][r].frame_index,
                                                    inference::ensemble_combine(probs, config.ensemble));
    record.model_probs = probs;
    ensemble.push_back(std::move(record));
  }
  const auto path = predictions_path(config, "ensemble");
  inference::write_predictions(path, ensemble);
  fmt::print(log, "predict: ensemble ({} mode) {} rows -> {}\n", inference::mode_name(config.ensemble.mode),
             ensemble.size(), path.string());
}

metrics::MetricReport command_evaluate(const RunConfig& config, const std::string& name, std::ostream& log) {
  require_data(config);
  const auto csv = predictions_path(config, name);
  const auto report = metrics::evaluate_files(csv, config.eval_annotations());
  const auto out = config.paths.output_dir / ("report_" + name + ".txt");
  metrics::write_report(out, report);
  fmt::print(log, "evaluate {}:\n{}report -> {}\n", name, metrics::render_table(report, label_map(config)),
             out.string());
  return report;
}

inference::WeightSearchResult command_ensemble_search(const RunConfig& config, std::ostream& log) {
  require_data(config);
  const auto videos = dataio::load_annotation_split(config.eval_annotations(), {});
  std::vector<std::vector<inference::PredictionRecord>> per_model;
  for (auto kind : ensemble_models()) per_model.push_back(inference::read_predictions(predictions_path(config, model_name(kind))));
  const auto result =
      inference::search_ensemble_weights(per_model, videos, config.ensemble_search_step, config.ensemble.mode);

  std::string text = fmt::format("ensemble.weights: {:.17g},{:.17g},{:.17g}\n", result.weights[0], result.weights[1],
                                 result.weights[2]);
  text += fmt::format("e_total: {:.17g}\nmacro_f1: {:.17g}\ntotal_accuracy: {:.17g}\ngrid_points: {}\n",
                      result.e_total, result.macro_f1, result.total_accuracy, result.evaluated);
  for (std::size_t m = 0; m < per_model.size(); ++m) {
    text += fmt::format("single_e_total_{}: {:.17g}\n", model_name(ensemble_models()[m]),
                        result.single_model_e_total[m]);
  }
  write_text(config.paths.output_dir / "ensemble_search.txt", text);
  fmt::print(log, "ensemble-search:\n{}", text);
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video facial expression recognition: synthetic data, training, prediction, evaluation"};
  app.name("vfer");
  std::string config_path;
  std::string model = "all";
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  bool resume = false;
  bool allow_mismatch = false;
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "Run config file")->required();
  app.add_option("--model", model, "static, gru, transformer or all");
  app.add_option("--seed", seed, "Override train.seed");
  app.add_flag("--deterministic", deterministic, "Deterministic mode (always on; recorded in the config echo)");
  app.add_flag("--resume", resume, "train: continue from last.ckpt");
  app.add_flag("--allow-fingerprint-mismatch", allow_mismatch, "train: resume despite a config change");
  for (const char* name : {"synth", "train", "predict", "evaluate", "ensemble-search"}) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return static_cast<int>(ExitCode::Ok);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return static_cast<int>(ExitCode::UsageError);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const auto kind = parse_model_selector(model);
    RunConfig config = parse_config(config_path);
    if (seed) config.train.seed = *seed;
    if (deterministic) config.deterministic = true;

    if (command == "synth") {
      command_synth(config, out);
    } else if (command == "train") {
      if (!kind) throw UsageError("train builds one model per invocation; pass --model static|gru|transformer");
      command_train(config, *kind, out, resume, allow_mismatch);
    } else if (command == "predict") {
      command_predict(config, kind, out);
    } else if (command == "evaluate") {
      command_evaluate(config, kind ? model_name(*kind) : "ensemble", out);
    } else {
      command_ensemble_search(config, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::UsageError);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::RuntimeError);
  }
  return static_cast<int>(ExitCode::Ok);
}

}  // namespace vfer::cli
