#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/core/numeric.hpp"
#include "vfer/dataio/frame_store.hpp"
#include "vfer/dataio/synthetic.hpp"
#include "vfer/models/model.hpp"
#include "vfer/training/checkpoint.hpp"
#include "vfer/training/loss.hpp"
#include "vfer/training/optimizer.hpp"
#include "vfer/training/train_config.hpp"
#include "vfer/training/trainer.hpp"

using namespace vfer;
using namespace vfer::training;
using models::HeadKind;

namespace {

models::BackboneConfig tiny_backbone(std::size_t dim = 8) {
  models::BackboneConfig b;
  b.architecture = models::BackboneArch::Tiny;
  b.feature_dim = dim;
  return b;
}

models::TemporalHeadConfig small_head(HeadKind kind, std::size_t width = 8) {
  models::TemporalHeadConfig h;
  h.kind = kind;
  h.gru_hidden = width;
  h.tf_model_dim = width;
  h.tf_heads = 2;
  h.tf_ffn_dim = 2 * width;
  h.dropout = 0.0;
  return h;
}

struct SmallDataset {
  testutil::TempDir dir;
  std::vector<dataio::VideoAnnotation> videos;
  std::unique_ptr<dataio::FrameStore> store;

  explicit SmallDataset(std::size_t count = 7, std::size_t frames = 9, double invalid = 0.3) {
    dataio::SyntheticSpec spec;
    spec.num_videos = count;
    spec.frames_per_video = frames;
    spec.invalid_fraction = invalid;
    videos = dataio::generate_synthetic_dataset(spec, 5, dir / "frames", dir / "ann");
    store = std::make_unique<dataio::FrameStore>(dir / "frames");
  }
};

TrainConfig quick_config(std::size_t epochs) {
  TrainConfig c;
  c.base_lr = 0.01;
  c.epochs = epochs;
  c.milestones = {};
  c.batch_size = 4;
  c.seed = 3;
  return c;
}

std::vector<Tensor> snapshot(models::ModelBundle& model) {
  std::vector<Tensor> out;
  for (const auto& p : model.parameters()) out.push_back(p.param->value);
  return out;
}

}  // namespace

// --------------------------------------------------------- loss

TEST(MaskedCrossEntropy, MatchesHighPrecisionOracle) {
  Tensor logits({2, 3, 7});
  testutil::fill_sin(logits, 2.0, 1.3, 0.2);
  const std::vector<int> labels{3, -1, 0, 6, -1, 2};
  const LossResult r = masked_cross_entropy(logits, labels);
  EXPECT_NEAR(r.value, 4.3243889092524979, 1e-12);
  EXPECT_EQ(r.valid_frames, 4u);
}

TEST(MaskedCrossEntropy, UniformLogitsGiveLogSeven) {
  const std::vector<int> labels{0, 4, 6};
  EXPECT_NEAR(masked_cross_entropy(Tensor({1, 3, 7}), labels).value, std::log(7.0), 1e-15);
}

TEST(MaskedCrossEntropy, MatchesPerFrameSummation) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits({3, 4, 7});
    testutil::fill_normal(logits, rng, 3.0);
    std::vector<int> labels(12);
    for (auto& l : labels) l = static_cast<int>(rng.below(8)) - 1;
    labels[trial % 12] = trial % 7;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t f = 0; f < 12; ++f) {
      if (labels[f] < 0) continue;
      double m = -1e300;
      for (std::size_t c = 0; c < 7; ++c) m = std::max(m, logits[f * 7 + c]);
      double z = 0.0;
      for (std::size_t c = 0; c < 7; ++c) z += std::exp(logits[f * 7 + c] - m);
      sum -= logits[f * 7 + static_cast<std::size_t>(labels[f])] - m - std::log(z);
      ++n;
    }
    EXPECT_NEAR(masked_cross_entropy(logits, labels).value, sum / static_cast<double>(n), 1e-12);
  }
}

TEST(MaskedCrossEntropy, InvalidFramesContributeNothing) {
  Tensor logits({1, 4, 7});
  testutil::fill_sin(logits, 1.5, 0.7, 0.1);
  const std::vector<int> mixed{2, -1, 5, -1};
  const LossResult r = masked_cross_entropy(logits, mixed);

  Tensor valid_only({1, 2, 7});
  for (std::size_t c = 0; c < 7; ++c) {
    valid_only[c] = logits[c];
    valid_only[7 + c] = logits[14 + c];
  }
  const std::vector<int> compact{2, 5};
  EXPECT_EQ(r.value, masked_cross_entropy(valid_only, compact).value);
  for (std::size_t c = 0; c < 7; ++c) {
    EXPECT_EQ(r.grad[7 + c], 0.0);
    EXPECT_EQ(r.grad[21 + c], 0.0);
  }

  // Analytic gradient vs finite differences.
  testutil::GradCheck check;
  testutil::check_gradient([&] { return masked_cross_entropy(logits, mixed).value; }, logits, r.grad, "logits",
                           check);
  EXPECT_LT(check.worst, 1e-7) << check.where;
}

TEST(MaskedCrossEntropy, RejectsAllInvalidAndBadShapes) {
  const std::vector<int> none{-1, -1};
  EXPECT_THROW(masked_cross_entropy(Tensor({1, 2, 7}), none), NoValidTargetError);
  const std::vector<int> short_labels{1};
  EXPECT_THROW(masked_cross_entropy(Tensor({1, 2, 7}), short_labels), InvalidInputError);
  const std::vector<int> bad{1, 9};
  EXPECT_THROW(masked_cross_entropy(Tensor({1, 2, 7}), bad), InvalidInputError);
}

// Loss gradients through each head at tiny widths.
TEST(HeadGradients, MatchFiniteDifferences) {
  constexpr double kEps = 1e-5;
  constexpr double kFloor = 1e-6;  // below this the quotient is roundoff-limited
  for (HeadKind kind : {HeadKind::Static, HeadKind::Gru, HeadKind::Transformer}) {
    for (std::uint64_t draw = 0; draw < 5; ++draw) {
      auto head = models::make_head(small_head(kind, 6), 4);
      Rng rng(100 + draw);
      head->init(rng);
      models::ParameterList params;
      head->collect(params);
      Tensor x({2, 3, 4});
      testutil::fill_normal(x, rng);
      std::vector<int> labels(6);
      for (auto& l : labels) l = static_cast<int>(rng.below(7));
      labels[draw % 6] = -1;

      for (auto& p : params) p.param->zero_grad();
      const LossResult r = masked_cross_entropy(head->forward(x, true), labels);
      const Tensor dx = head->backward(r.grad);
      auto loss = [&] { return masked_cross_entropy(head->forward(x, true), labels).value; };
      testutil::GradCheck check;
      for (auto& p : params) testutil::check_gradient(loss, p.param->value, p.param->grad, p.name, check, kEps, kFloor);
      testutil::check_gradient(loss, x, dx, "features", check, kEps, kFloor);
      EXPECT_LT(check.worst, 1e-4) << models::head_name(kind) << " draw " << draw << " at " << check.where;
    }
  }
}

// --------------------------------------------------------- schedule

TEST(Schedule, DefaultMilestonesExact) {
  const TrainConfig c;
  const double expected[] = {5e-4, 5e-4, 5e-5, 5e-5, 5e-6, 5e-6, 5e-6, 5e-6, 5e-7, 5e-7};
  for (std::size_t e = 0; e < 10; ++e) EXPECT_EQ(lr_at_epoch(c, e), expected[e]) << e;
  EXPECT_THROW(lr_at_epoch(c, 10), InvalidInputError);
}

TEST(Schedule, NonIncreasingWithOneDecayPerMilestone) {
  TrainConfig c;
  c.base_lr = 0.3;
  c.epochs = 12;
  c.milestones = {1, 5, 6, 11};
  c.lr_gamma = 0.5;
  std::size_t decays = 0;
  for (std::size_t e = 1; e < c.epochs; ++e) {
    EXPECT_LE(lr_at_epoch(c, e), lr_at_epoch(c, e - 1));
    decays += lr_at_epoch(c, e) < lr_at_epoch(c, e - 1);
  }
  EXPECT_EQ(decays, 4u);
  EXPECT_EQ(lr_at_epoch(c, 11), 0.3 / 16.0);
}

TEST(TrainConfigValidation, RejectsBadFields) {
  auto expect_bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  expect_bad([](TrainConfig& c) { c.base_lr = 0.0; });
  expect_bad([](TrainConfig& c) { c.milestones = {4, 2}; });
  expect_bad([](TrainConfig& c) { c.milestones = {2, 10}; });
  expect_bad([](TrainConfig& c) { c.window_T = 8; });
  expect_bad([](TrainConfig& c) { c.optimizer = "adam"; });
  expect_bad([](TrainConfig& c) { c.epochs = 0; });
  expect_bad([](TrainConfig& c) { c.stride = 0; });
  TrainConfig().validate();
  EXPECT_EQ(TrainConfig().effective_batch_size(HeadKind::Static), 128u);
  EXPECT_EQ(TrainConfig().effective_batch_size(HeadKind::Gru), 32u);
}

// --------------------------------------------------------- optimizer

TEST(SgdMomentum, HeavyBallUpdates) {
  models::Parameter w({2});
  models::Parameter frozen({1});
  frozen.trainable = false;
  w.value = Tensor({2}, {1.0, -2.0});
  SgdMomentum opt({{"w", &w}, {"frozen", &frozen}}, 0.9);
  ASSERT_EQ(opt.parameters().size(), 1u);

  w.grad = Tensor({2}, {0.5, 1.0});
  opt.step(0.1);
  EXPECT_DOUBLE_EQ(w.value[0], 1.0 - 0.05);
  EXPECT_DOUBLE_EQ(w.value[1], -2.0 - 0.1);
  w.grad = Tensor({2}, {0.5, 1.0});
  opt.step(0.1);
  // buf = 0.9*0.5 + 0.5 = 0.95 ; 0.9*1 + 1 = 1.9
  EXPECT_DOUBLE_EQ(w.value[0], 0.95 - 0.095);
  EXPECT_DOUBLE_EQ(w.value[1], -2.1 - 0.19);
  EXPECT_DOUBLE_EQ(opt.buffers()[0][1], 1.9);
}

// --------------------------------------------------------- checkpoints

TEST(Checkpoint, RoundTripIsBitwise) {
  testutil::TempDir dir;
  models::ModelBundle a(tiny_backbone(), small_head(HeadKind::Gru), 1);
  SgdMomentum opt_a(a.parameters(), 0.9);
  Rng rng(2);
  for (auto& b : opt_a.buffers()) testutil::fill_normal(b, rng);
  TrainConfig cfg;
  Checkpoint state;
  state.epochs_completed = 3;
  state.best_e_total = 0.625;
  state.best_epoch = 1;
  state.metrics["train_loss"] = 1.25;
  save_checkpoint(dir / "c.ckpt", a, opt_a, cfg, state);

  models::ModelBundle b(tiny_backbone(), small_head(HeadKind::Gru), 9);
  SgdMomentum opt_b(b.parameters(), 0.9);
  const Checkpoint loaded = load_checkpoint(dir / "c.ckpt", b, &opt_b, &cfg);
  EXPECT_EQ(loaded.epochs_completed, 3u);
  EXPECT_EQ(loaded.best_e_total, 0.625);
  EXPECT_EQ(loaded.best_epoch, 1u);
  EXPECT_EQ(loaded.metrics.at("train_loss"), 1.25);
  EXPECT_EQ(loaded.model_fingerprint, a.fingerprint());
  EXPECT_EQ(snapshot(a), snapshot(b));
  EXPECT_EQ(opt_a.buffers(), opt_b.buffers());
  EXPECT_EQ(read_checkpoint(dir / "c.ckpt").epochs_completed, 3u);
}

TEST(Checkpoint, RefusesChangedConfigUnlessOverridden) {
  testutil::TempDir dir;
  models::ModelBundle a(tiny_backbone(), small_head(HeadKind::Gru, 8), 1);
  SgdMomentum opt(a.parameters(), 0.9);
  TrainConfig cfg;
  save_checkpoint(dir / "c.ckpt", a, opt, cfg, {});

  models::ModelBundle wider(tiny_backbone(), small_head(HeadKind::Gru, 10), 1);
  EXPECT_THROW(load_checkpoint(dir / "c.ckpt", wider, nullptr, &cfg), FingerprintMismatchError);

  TrainConfig other = cfg;
  other.base_lr = 1e-3;
  models::ModelBundle same(tiny_backbone(), small_head(HeadKind::Gru, 8), 2);
  EXPECT_THROW(load_checkpoint(dir / "c.ckpt", same, nullptr, &other), FingerprintMismatchError);
  load_checkpoint(dir / "c.ckpt", same, nullptr, &other, true);
  EXPECT_EQ(snapshot(same), snapshot(a));
}

// --------------------------------------------------------- fit

TEST(TrainingSamples, FramesForStaticWindowsForTemporal) {
  dataio::VideoAnnotation v{"a", {-1, -1, 0, 1, 2, 3, 4, 5, 6, 0, 1}, {}};
  std::vector<dataio::VideoAnnotation> videos{v};
  TrainConfig c;
  const auto frames = training_samples(videos, c, false);
  EXPECT_EQ(frames.size(), 9u);
  for (const auto& s : frames) EXPECT_EQ(s.frames.size(), 1u);
  const auto windows = training_samples(videos, c, true);
  ASSERT_FALSE(windows.empty());
  for (const auto& s : windows) EXPECT_EQ(s.frames.size(), 9u);
  std::vector<dataio::VideoAnnotation> empty{{"b", {-1, -1}, {}}};
  EXPECT_THROW(training_samples(empty, c, false), InvalidInputError);
}

TEST(Fit, LossDecreasesAndWritesArtifacts) {
  SmallDataset data;
  testutil::TempDir out;
  models::ModelBundle model(tiny_backbone(), small_head(HeadKind::Static), 1);
  TrainConfig cfg = quick_config(4);
  FitOptions opts;
  opts.output_dir = out.path();
  opts.validation = data.videos;
  const FitResult r = fit(model, data.videos, *data.store, cfg, opts);
  ASSERT_EQ(r.log.size(), 4u);
  EXPECT_LT(r.log.back().train_loss, r.log.front().train_loss);
  EXPECT_TRUE(r.log.front().validation.has_value());
  EXPECT_TRUE(std::filesystem::exists(out / "last.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(out / "best.ckpt"));
  EXPECT_EQ(read_checkpoint(out / "best.ckpt").best_epoch, r.best_epoch);

  std::ifstream log(out / "metrics.log");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) {
    EXPECT_EQ(line.rfind("epoch=" + std::to_string(lines) + " ", 0), 0u) << line;
    EXPECT_NE(line.find("val_e_total="), std::string::npos);
    ++lines;
  }
  EXPECT_EQ(lines, 4u);
}

TEST(Fit, DeterministicAcrossRuns) {
  SmallDataset data;
  auto run = [&] {
    models::ModelBundle model(tiny_backbone(), small_head(HeadKind::Transformer), 1);
    TrainConfig cfg = quick_config(1);
    fit(model, data.videos, *data.store, cfg);
    return std::make_pair(fit(model, data.videos, *data.store, cfg).log[0].train_loss, snapshot(model));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Fit, ResumeMatchesUninterruptedRun) {
  SmallDataset data;
  TrainConfig cfg = quick_config(6);
  cfg.milestones = {2, 4};
  auto head = small_head(HeadKind::Gru);
  head.dropout = 0.2;  // exercises the per-step dropout seeding

  testutil::TempDir full_dir;
  models::ModelBundle full(tiny_backbone(), head, 1);
  FitOptions full_opts;
  full_opts.output_dir = full_dir.path();
  const FitResult full_result = fit(full, data.videos, *data.store, cfg, full_opts);

  testutil::TempDir part_dir;
  models::ModelBundle first(tiny_backbone(), head, 1);
  FitOptions stop;
  stop.output_dir = part_dir.path();
  stop.stop_after = 5;
  EXPECT_EQ(fit(first, data.videos, *data.store, cfg, stop).log.size(), 5u);

  models::ModelBundle resumed(tiny_backbone(), head, 77);
  FitOptions resume;
  resume.output_dir = part_dir.path();
  resume.resume_from = part_dir / "last.ckpt";
  const FitResult rest = fit(resumed, data.videos, *data.store, cfg, resume);
  EXPECT_EQ(rest.start_epoch, 5u);
  ASSERT_EQ(rest.log.size(), 1u);
  EXPECT_EQ(rest.log[0].lr, lr_at_epoch(cfg, 5));
  EXPECT_EQ(rest.log[0].lr, 1e-4);
  EXPECT_EQ(rest.log[0].train_loss, full_result.log[5].train_loss);
  EXPECT_EQ(snapshot(resumed), snapshot(full));
}

TEST(Fit, SkipsUnreadableSamples) {
  SmallDataset data(7, 9, 0.0);
  std::filesystem::remove(data.dir / "frames" / data.videos[2].video_id / dataio::FrameStore::frame_file_name(4));
  models::ModelBundle model(tiny_backbone(), small_head(HeadKind::Static), 1);
  std::vector<std::string> warnings;
  FitOptions opts;
  opts.on_warning = [&](const std::string& w) { warnings.push_back(w); };
  const FitResult r = fit(model, data.videos, *data.store, quick_config(1), opts);
  EXPECT_EQ(r.log[0].skipped_samples, 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find(data.videos[2].video_id), std::string::npos);
}

// Each head, backbone included, memorizes one repeated batch.
TEST(Fit, OneBatchOverfit) {
  Rng rng(8);
  Tensor frames({2, 9, 112, 112, 3});
  testutil::fill_normal(frames, rng);
  std::vector<int> labels(18);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 7);
  labels[4] = -1;
  for (HeadKind kind : {HeadKind::Static, HeadKind::Gru, HeadKind::Transformer}) {
    models::ModelBundle model(tiny_backbone(16), small_head(kind, 16), 4);
    SgdMomentum opt(model.parameters(), 0.9);
    double loss = 0.0;
    std::size_t step = 0;
    for (; step < 200; ++step) {
      model.zero_grad();
      const LossResult r = masked_cross_entropy(model.forward(frames, true), labels);
      loss = r.value;
      if (loss < 0.05) break;
      model.backward(r.grad);
      opt.step(0.05);
    }
    EXPECT_LT(loss, 0.05) << models::head_name(kind);
    std::printf("%s: loss %.4g after %zu steps\n", std::string(models::head_name(kind)).c_str(), loss, step);
  }
}
