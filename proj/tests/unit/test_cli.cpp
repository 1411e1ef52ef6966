#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vfer/cli/commands.hpp"
#include "vfer/cli/run_config.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/dataio/annotation.hpp"
#include "vfer/inference/predictions_io.hpp"

using namespace vfer;
using namespace vfer::cli;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

int run_args(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "vfer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST(RunConfig, MinimalConfigTakesDefaults) {
  const RunConfig c = parse_config_text("paths.frames_root: /f\npaths.annotations_root: /a\npaths.output_dir: /o\n");
  EXPECT_EQ(c.paths.frames_root, "/f");
  EXPECT_EQ(c.train.window_T, 9u);
  EXPECT_EQ(c.train.base_lr, 5e-4);
  EXPECT_EQ(c.train.epochs, 10u);
  EXPECT_EQ(c.train.milestones, (std::vector<std::size_t>{2, 4, 8}));
  EXPECT_EQ(c.ensemble.weights, (std::vector<double>{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}));
  EXPECT_EQ(c.ensemble.mode, inference::EnsembleMode::Probability);
  EXPECT_EQ(c.backbone.architecture, models::BackboneArch::ResNet50);
}

TEST(RunConfig, RejectsEvenWindow) {
  EXPECT_THROW(parse_config_text("train.window_T: 8\n"), ConfigError);
  EXPECT_NE(message_of("window_T: 8\n").find("window_T"), std::string::npos);
}

TEST(RunConfig, ErrorsNameKeyAndType) {
  EXPECT_NE(message_of("train.learning_rate: 0.1\n").find("train.learning_rate"), std::string::npos);
  EXPECT_NE(message_of("train.epochs: ten\n").find("integer"), std::string::npos);
  EXPECT_NE(message_of("train.base_lr: fast\n").find("real"), std::string::npos);
  EXPECT_NE(message_of("run.deterministic: maybe\n").find("boolean"), std::string::npos);
  EXPECT_NE(message_of("train.epochs: 3\ntrain.epochs: 4\n").find("train.epochs"), std::string::npos);
  EXPECT_FALSE(message_of("seed: 4\n").empty());  // train.seed and synth.seed
  EXPECT_FALSE(message_of("no colon here\n").empty());
  EXPECT_FALSE(message_of("ensemble.weights: 0.5, 0.5\n").empty());
}

TEST(RunConfig, ListsCommentsAndNormalization) {
  const RunConfig c = parse_config_text(
      "# comment line\n"
      "train.milestones: [3, 6]   # trailing comment\n"
      "ensemble.weights: 2, 1, 1\n"
      "ensemble.mode: logit\n"
      "epochs: 7\n");
  EXPECT_EQ(c.train.milestones, (std::vector<std::size_t>{3, 6}));
  EXPECT_EQ(c.train.epochs, 7u);
  EXPECT_EQ(c.ensemble.weights, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_EQ(c.ensemble.mode, inference::EnsembleMode::Logit);
}

TEST(RunConfig, EchoRoundTripsExactly) {
  RunConfig c = parse_config_text(
      "paths.frames_root: /data/frames\n"
      "train.base_lr: 0.0031\n"
      "ensemble.weights: 0.1, 0.2, 0.7\n"
      "head.dropout: 0.15\n"
      "synth.motion_classes: 4, 5, 6\n"
      "run.deterministic: true\n");
  const std::string echo = serialize_config(c);
  const RunConfig back = parse_config_text(echo);
  EXPECT_EQ(serialize_config(back), echo);
  EXPECT_EQ(back.train.base_lr, 0.0031);
  EXPECT_EQ(back.ensemble.weights, c.ensemble.weights);
  EXPECT_EQ(back.synth.spec.motion_classes, (std::vector<int>{4, 5, 6}));
  EXPECT_TRUE(back.deterministic);
}

TEST(ModelSelector, Parses) {
  EXPECT_EQ(parse_model_selector("gru"), models::HeadKind::Gru);
  EXPECT_EQ(parse_model_selector("all"), std::nullopt);
  EXPECT_THROW(parse_model_selector("lstm"), UsageError);
}

TEST(Cli, UsageErrorsExitTwo) {
  testutil::TempDir dir;
  write_text(dir / "c.cfg", "paths.output_dir: " + (dir / "out").string() + "\n");
  const std::string cfg = (dir / "c.cfg").string();
  EXPECT_EQ(run_args({}), 2);
  EXPECT_EQ(run_args({"fly", "--config", cfg}), 2);
  EXPECT_EQ(run_args({"train"}), 2);  // --config missing
  std::string err;
  EXPECT_EQ(run_args({"train", "--config", cfg}, &err), 2);  // --model all
  EXPECT_NE(err.find("--model"), std::string::npos);
  EXPECT_EQ(run_args({"predict", "--config", cfg, "--model", "lstm"}), 2);
  EXPECT_EQ(run_args({"evaluate", "--config", (dir / "absent.cfg").string()}), 1);
  EXPECT_EQ(run_args({"--help"}), 0);
}

// synth -> train x3 -> predict -> evaluate -> ensemble-search at toy scale.
TEST(Cli, EndToEndPipeline) {
  testutil::TempDir dir;
  write_text(dir / "run.cfg",
             "paths.frames_root: " + (dir / "frames").string() + "\n" +
                 "paths.annotations_root: " + (dir / "ann").string() + "\n" +
                 "paths.output_dir: " + (dir / "out").string() + "\n" +
                 "backbone.architecture: tiny\n"
                 "backbone.feature_dim: 8\n"
                 "head.gru_hidden: 8\n"
                 "head.tf_model_dim: 8\n"
                 "head.tf_heads: 2\n"
                 "head.tf_ffn_dim: 16\n"
                 "train.base_lr: 0.01\n"
                 "train.epochs: 2\n"
                 "train.milestones: 1\n"
                 "train.batch_size: 4\n"
                 "synth.num_videos: 7\n"
                 "synth.eval_videos: 7\n"
                 "synth.frames_per_video: 11\n"
                 "synth.invalid_fraction: 0.3\n");
  const std::string cfg = (dir / "run.cfg").string();
  std::string err;
  ASSERT_EQ(run_args({"synth", "--config", cfg}, &err), 0) << err;
  for (const char* m : {"static", "gru", "transformer"}) {
    ASSERT_EQ(run_args({"train", "--config", cfg, "--model", m, "--deterministic"}, &err), 0) << err;
    EXPECT_TRUE(fs::exists(dir / "out" / m / "best.ckpt"));
    EXPECT_EQ(line_count(dir / "out" / m / "metrics.log"), 2u);
  }
  // The echo is itself a valid config.
  const RunConfig echo = parse_config(dir / "out" / "gru" / "config.echo");
  EXPECT_TRUE(echo.deterministic);

  ASSERT_EQ(run_args({"predict", "--config", cfg}, &err), 0) << err;
  const RunConfig config = parse_config(cfg);
  const auto eval = dataio::load_annotation_split(config.eval_annotations(), config.paths.frames_root);
  std::size_t valid = 0;
  for (const auto& v : eval) valid += v.valid_count();
  for (const char* name : {"static", "gru", "transformer", "ensemble"}) {
    EXPECT_EQ(inference::read_predictions(predictions_path(config, name)).size(), valid) << name;
  }
  ASSERT_EQ(run_args({"evaluate", "--config", cfg, "--model", "gru"}, &err), 0) << err;
  EXPECT_TRUE(fs::exists(dir / "out" / "report_gru.txt"));

  // Ground truth written as a prediction file scores 1.
  std::vector<inference::PredictionRecord> truth;
  for (const auto& v : eval) {
    for (std::size_t f = 0; f < v.labels.size(); ++f) {
      if (v.labels[f] < 0) continue;
      ProbVector p;
      p[static_cast<std::size_t>(v.labels[f])] = 1.0;
      truth.push_back(inference::PredictionRecord::make(v.video_id, f, p));
    }
  }
  inference::write_predictions(predictions_path(config, "truth"), truth);
  std::ostringstream log;
  EXPECT_EQ(command_evaluate(config, "truth", log).e_total, 1.0);

  ASSERT_EQ(run_args({"ensemble-search", "--config", cfg}, &err), 0) << err;
  const auto search = command_ensemble_search(config, log);
  EXPECT_NEAR(search.weights[0] + search.weights[1] + search.weights[2], 1.0, 1e-12);
  for (double e : search.single_model_e_total) EXPECT_GE(search.e_total, e);
  EXPECT_TRUE(fs::exists(dir / "out" / "ensemble_search.txt"));

  // Resuming under a changed training config is refused unless overridden.
  std::string text;
  {
    std::ifstream in(dir / "run.cfg");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  text.replace(text.find("train.base_lr: 0.01"), 19, "train.base_lr: 0.02");
  text.replace(text.find("train.epochs: 2"), 15, "train.epochs: 3");
  write_text(dir / "run.cfg", text);
  EXPECT_EQ(run_args({"train", "--config", cfg, "--model", "gru", "--resume"}, &err), 1);
  EXPECT_NE(err.find("fingerprint"), std::string::npos) << err;
  ASSERT_EQ(run_args({"train", "--config", cfg, "--model", "gru", "--resume", "--allow-fingerprint-mismatch"}, &err), 0)
      << err;
  EXPECT_EQ(line_count(dir / "out" / "gru" / "metrics.log"), 3u);
}
