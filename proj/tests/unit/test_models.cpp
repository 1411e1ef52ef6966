#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "torch_oracles.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/models/backbone.hpp"
#include "vfer/models/heads.hpp"
#include "vfer/models/model.hpp"
#include "vfer/models/positional_encoding.hpp"
#include "vfer/models/weights_io.hpp"

using namespace vfer;
using namespace vfer::models;

namespace {

TemporalHeadConfig head_config(HeadKind kind, std::size_t width, std::size_t heads = 2, std::size_t ffn = 8) {
  TemporalHeadConfig c;
  c.kind = kind;
  c.gru_layers = 2;
  c.gru_hidden = width;
  c.tf_model_dim = width;
  c.tf_heads = heads;
  c.tf_layers = 2;
  c.tf_ffn_dim = ffn;
  c.dropout = 0.0;
  return c;
}

BackboneConfig tiny_backbone(std::size_t dim = 16) {
  BackboneConfig b;
  b.architecture = BackboneArch::Tiny;
  b.feature_dim = dim;
  return b;
}

Tensor sin_input(Shape shape, double freq = 0.5, double phase = 0.3) {
  Tensor t(std::move(shape));
  testutil::fill_sin(t, 1.0, freq, phase);
  return t;
}

Tensor frames(std::size_t batch, std::size_t steps, std::uint64_t seed) {
  Tensor t({batch, steps, 112, 112, 3});
  Rng rng(seed);
  testutil::fill_normal(t, rng);
  return t;
}

Tensor time_slice(const Tensor& x, std::size_t b, std::size_t t) {
  const std::size_t width = x.dim(2);
  Tensor row({width});
  for (std::size_t k = 0; k < width; ++k) row[k] = x[(b * x.dim(1) + t) * width + k];
  return row;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

// --------------------------------------------------------- positional encoding

TEST(PositionalEncoding, RowZeroAlternatesZeroOne) {
  const Tensor pe = positional_encoding(3, 10);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(pe[k], k % 2 == 0 ? 0.0 : 1.0);
}

TEST(PositionalEncoding, MatchesHighPrecisionValues) {
  const Tensor a = positional_encoding(2, 4);
  const double row1[] = {0.84147098480789651, 0.54030230586813972, 0.0099998333341666647, 0.99995000041666528};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a[4 + k], row1[k], 1e-12);

  const Tensor b = positional_encoding(8, 8);
  const double row7[] = {0.65698659871878909, 0.75390225434330464, 0.64421768723769105, 0.76484218728448843,
                         0.069942847337532764, 0.99755100025327957, 0.0069999428334733915, 0.9999755001000415};
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(b[7 * 8 + k], row7[k], 1e-12);
}

TEST(PositionalEncoding, RangeAndPurity) {
  const Tensor pe = positional_encoding(50, 512);
  EXPECT_EQ(pe.shape(), (Shape{50, 512}));
  for (double v : pe.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(positional_encoding(50, 512), pe);
}

TEST(PositionalEncoding, RejectsBadArguments) {
  EXPECT_THROW(positional_encoding(4, 5), ConfigError);
  EXPECT_THROW(positional_encoding(0, 4), InvalidInputError);
}

// --------------------------------------------------------- heads vs oracles

TEST(GruHead, MatchesTorchReference) {
  GruHead head(4, head_config(HeadKind::Gru, 5));
  ParameterList params;
  head.collect(params);
  testutil::fill_oracle_parameters(params);
  const Tensor logits = head.forward(sin_input({2, 3, 4}), false);
  ASSERT_EQ(logits.shape(), (Shape{2, 3, 7}));
  for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_NEAR(logits[i], oracle::kGruLogits[i], 1e-12) << i;
}

TEST(TransformerHead, MatchesTorchReference) {
  TransformerHead head(4, head_config(HeadKind::Transformer, 6));
  ParameterList params;
  head.collect(params);
  testutil::fill_oracle_parameters(params);
  const Tensor logits = head.forward(sin_input({2, 5, 4}), false);
  ASSERT_EQ(logits.shape(), (Shape{2, 5, 7}));
  for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_NEAR(logits[i], oracle::kTransformerLogits[i], 1e-12) << i;
}

TEST(GruHead, MatchesHandRolledRecurrence) {
  constexpr std::size_t D = 3, H = 2, T = 3;
  GruHead head(D, head_config(HeadKind::Gru, H));
  ParameterList params;
  head.collect(params);
  for (std::size_t k = 0; k < params.size(); ++k) testutil::fill_sin(params[k].param->value, 0.5, 0.7, 0.2 * k);
  const Tensor x = sin_input({1, T, D}, 0.9, 0.1);
  const Tensor logits = head.forward(x, false);

  // Scalar evaluation of the GRU update equations, layer by layer.
  std::vector<std::vector<double>> seq(T);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < D; ++k) seq[t].push_back(x[t * D + k]);
  for (const GruLayer& layer : head.layers) {
    const std::size_t in = seq[0].size();
    const auto& wi = layer.weight_ih.value;
    const auto& wh = layer.weight_hh.value;
    const auto& bi = layer.bias_ih.value;
    const auto& bh = layer.bias_hh.value;
    std::vector<double> h(H, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      auto gate = [&](std::size_t row, bool input_side) {
        double s = input_side ? bi[row] : bh[row];
        if (input_side) {
          for (std::size_t j = 0; j < in; ++j) s += wi[row * in + j] * seq[t][j];
        } else {
          for (std::size_t j = 0; j < H; ++j) s += wh[row * H + j] * h[j];
        }
        return s;
      };
      std::vector<double> next(H);
      for (std::size_t k = 0; k < H; ++k) {
        const double r = sigmoid(gate(k, true) + gate(k, false));
        const double z = sigmoid(gate(H + k, true) + gate(H + k, false));
        const double n = std::tanh(gate(2 * H + k, true) + r * gate(2 * H + k, false));
        next[k] = (1.0 - z) * n + z * h[k];
      }
      h = next;
      seq[t] = h;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < 7; ++c) {
      double expected = head.classifier.bias.value[c];
      for (std::size_t j = 0; j < H; ++j) expected += head.classifier.weight.value[c * H + j] * seq[t][j];
      EXPECT_NEAR(logits[t * 7 + c], expected, 1e-14);
    }
  }
}

TEST(MultiHeadSelfAttention, SingleHeadMatchesScaledDotProduct) {
  MultiHeadSelfAttention attn(2, 1);
  const double w[] = {0.5, -0.2, 0.1, 0.3, -0.4, 0.6, 0.2, 0.2, 0.7, -0.1, 0.3, 0.9};
  for (std::size_t i = 0; i < 12; ++i) attn.in_proj_weight.value[i] = w[i];
  const double b[] = {0.01, -0.02, 0.03, 0.0, 0.05, -0.05};
  for (std::size_t i = 0; i < 6; ++i) attn.in_proj_bias.value[i] = b[i];
  attn.out_proj.weight.value = Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0});
  attn.out_proj.bias.value = Tensor({2}, 0.0);
  const Tensor x({1, 2, 2}, {0.8, -0.3, 0.2, 0.5});
  const Tensor y = attn.forward(x);

  double q[2][2], k[2][2], v[2][2];
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t j = 0; j < 2; ++j) {
      auto proj = [&](std::size_t row) { return b[row] + w[row * 2] * x[t * 2] + w[row * 2 + 1] * x[t * 2 + 1]; };
      q[t][j] = proj(j);
      k[t][j] = proj(2 + j);
      v[t][j] = proj(4 + j);
    }
  }
  for (std::size_t t = 0; t < 2; ++t) {
    double s[2];
    for (std::size_t u = 0; u < 2; ++u) s[u] = (q[t][0] * k[u][0] + q[t][1] * k[u][1]) / std::sqrt(2.0);
    const double m = std::max(s[0], s[1]);
    const double e0 = std::exp(s[0] - m), e1 = std::exp(s[1] - m);
    const double a0 = e0 / (e0 + e1), a1 = e1 / (e0 + e1);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(y[t * 2 + j], a0 * v[0][j] + a1 * v[1][j], 1e-14);
  }
}

// --------------------------------------------------------- head properties

TEST(Heads, ShapesAndEmptySequence) {
  for (HeadKind kind : {HeadKind::Static, HeadKind::Gru, HeadKind::Transformer}) {
    auto head = make_head(head_config(kind, 8, 2, 16), 6);
    Rng rng(1);
    head->init(rng);
    EXPECT_EQ(head->forward(sin_input({2, 9, 6}), false).shape(), (Shape{2, 9, 7}));
    EXPECT_THROW(head->forward(Tensor({2, 0, 6}), false), InvalidInputError);
    EXPECT_THROW(head->forward(Tensor({2, 3, 5}), false), InvalidInputError);
  }
}

TEST(StaticHead, ZeroInputGivesBiasAndIsFramewise) {
  StaticHead head(2048);
  Rng rng(2);
  head.init(rng);
  testutil::fill_normal(head.classifier.bias.value, rng);
  const Tensor logits = head.forward(Tensor({2, 9, 2048}), false);
  ASSERT_EQ(logits.shape(), (Shape{2, 9, 7}));
  for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_EQ(logits[i], head.classifier.bias.value[i % 7]);

  StaticHead small(5);
  small.init(rng);
  const Tensor x = sin_input({1, 4, 5});
  Tensor permuted({1, 4, 5});
  const std::size_t order[] = {2, 0, 3, 1};
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t k = 0; k < 5; ++k) permuted[t * 5 + k] = x[order[t] * 5 + k];
  const Tensor a = small.forward(x, false);
  const Tensor b = small.forward(permuted, false);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t c = 0; c < 7; ++c) EXPECT_EQ(b[t * 7 + c], a[order[t] * 7 + c]);
}

TEST(GruHead, IsCausal) {
  GruHead head(6, head_config(HeadKind::Gru, 8));
  Rng rng(3);
  head.init(rng);
  Tensor x = sin_input({2, 9, 6});
  const Tensor before = head.forward(x, false);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 6; ++k) x[(b * 9 + 8) * 6 + k] += 1.5;
  const Tensor after = head.forward(x, false);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t t = 0; t < 9; ++t) {
      for (std::size_t c = 0; c < 7; ++c) {
        const std::size_t i = (b * 9 + t) * 7 + c;
        if (t < 8) {
          EXPECT_EQ(after[i], before[i]);
        }
      }
    }
  }
  EXPECT_NE(time_slice(after, 0, 8), time_slice(before, 0, 8));
}

TEST(TransformerHead, PermutationEquivariantWithoutPositions) {
  TransformerHead head(6, head_config(HeadKind::Transformer, 8, 2, 16));
  Rng rng(4);
  head.init(rng);
  head.set_positional_encoding(false);
  const Tensor x = sin_input({1, 5, 6});
  const std::size_t order[] = {4, 2, 0, 1, 3};
  Tensor permuted({1, 5, 6});
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t k = 0; k < 6; ++k) permuted[t * 6 + k] = x[order[t] * 6 + k];
  const Tensor a = head.forward(x, false);
  const Tensor b = head.forward(permuted, false);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t c = 0; c < 7; ++c) EXPECT_NEAR(b[t * 7 + c], a[order[t] * 7 + c], 1e-12);

  head.set_positional_encoding(true);
  EXPECT_NE(head.forward(permuted, false).values()[0], head.forward(x, false).values()[order[0] * 7]);
}

TEST(Heads, DropoutOnlyInTraining) {
  TemporalHeadConfig c = head_config(HeadKind::Transformer, 8, 2, 16);
  c.dropout = 0.5;
  auto head = make_head(c, 6);
  Rng rng(5);
  head->init(rng);
  const Tensor x = sin_input({1, 4, 6});
  EXPECT_EQ(head->forward(x, false), head->forward(x, false));
  head->reseed(1);
  const Tensor a = head->forward(x, true);
  head->reseed(1);
  EXPECT_EQ(head->forward(x, true), a);
  EXPECT_NE(a, head->forward(x, false));
}

// --------------------------------------------------------- backbones

TEST(TinyBackbone, FramesAreIndependentAndDeterministic) {
  ModelBundle model(tiny_backbone(), head_config(HeadKind::Static, 8), 7);
  const Tensor clip = frames(1, 3, 8);
  const Tensor features = model.extract_features(clip);
  ASSERT_EQ(features.shape(), (Shape{1, 3, 16}));

  // Frame 1 repeated at positions 0 and 2 of a new clip.
  const std::size_t frame_size = 112 * 112 * 3;
  Tensor dup({1, 3, 112, 112, 3});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < frame_size; ++i) dup[t * frame_size + i] = clip[(t == 1 ? 0 : 1) * frame_size + i];
  const Tensor g = model.extract_features(dup);
  EXPECT_EQ(time_slice(g, 0, 0), time_slice(g, 0, 2));
  EXPECT_EQ(time_slice(g, 0, 1), time_slice(features, 0, 0));
  EXPECT_EQ(time_slice(g, 0, 0), time_slice(features, 0, 1));

  ModelBundle twin(tiny_backbone(), head_config(HeadKind::Static, 8), 7);
  EXPECT_EQ(twin.extract_features(clip), features);
  EXPECT_EQ(twin.forward(clip), model.forward(clip));
}

TEST(ResNet50Backbone, FeatureShape) {
  BackboneConfig cfg;
  ModelBundle model(cfg, head_config(HeadKind::Static, 8), 1);
  const Tensor f = model.extract_features(frames(1, 2, 9));
  EXPECT_EQ(f.shape(), (Shape{1, 2, 2048}));
  for (double v : f.values()) EXPECT_GE(v, 0.0);  // pooled after ReLU
}

TEST(ResNet50Backbone, ParameterNamesFollowTorchvision) {
  ResNet50Backbone backbone;
  ParameterList params;
  backbone.collect(params);
  std::size_t count = 0;
  bool has_conv1 = false, has_last = false, has_fc = false;
  for (const auto& p : params) {
    count += p.param->value.size();
    has_conv1 |= p.name == "conv1.weight";
    has_last |= p.name == "layer4.2.bn3.running_var";
    has_fc |= p.name.rfind("fc.", 0) == 0;
  }
  EXPECT_TRUE(has_conv1);
  EXPECT_TRUE(has_last);
  EXPECT_FALSE(has_fc);
  // torchvision resnet50 without fc, counting BN buffers (minus num_batches_tracked).
  EXPECT_EQ(count, 23508032u + 53120u);
}

// --------------------------------------------------------- weights

TEST(ModelWeights, RoundTripAndFingerprint) {
  testutil::TempDir dir;
  ModelBundle a(tiny_backbone(), head_config(HeadKind::Gru, 8), 1);
  ModelBundle b(tiny_backbone(), head_config(HeadKind::Gru, 8), 2);
  const Tensor clip = frames(1, 3, 3);
  ASSERT_NE(a.forward(clip), b.forward(clip));
  save_model_weights(a, dir / "m.bin");
  load_model_weights(b, dir / "m.bin");
  EXPECT_EQ(a.forward(clip), b.forward(clip));

  ModelBundle wider(tiny_backbone(), head_config(HeadKind::Gru, 10), 1);
  EXPECT_THROW(load_model_weights(wider, dir / "m.bin"), FingerprintMismatchError);
  EXPECT_THROW(load_model_weights(b, dir / "absent.bin"), IoError);
}

TEST(ModelWeights, FingerprintCoversEveryField) {
  const BackboneConfig base_bb = tiny_backbone();
  const TemporalHeadConfig base_head = head_config(HeadKind::Transformer, 8);
  const std::string base = fingerprint_of(canonical_config(base_bb, base_head));
  EXPECT_EQ(base.size(), 16u);
  std::vector<TemporalHeadConfig> heads(7, base_head);
  heads[0].kind = HeadKind::Gru;
  heads[1].gru_layers = 3;
  heads[2].gru_hidden = 9;
  heads[3].tf_model_dim = 10;
  heads[4].tf_heads = 4;
  heads[5].tf_layers = 1;
  heads[6].dropout = 0.2;
  for (const auto& h : heads) EXPECT_NE(fingerprint_of(canonical_config(base_bb, h)), base);
  BackboneConfig other = base_bb;
  other.feature_dim = 32;
  EXPECT_NE(fingerprint_of(canonical_config(other, base_head)), base);
}

TEST(BackboneWeights, LoadSkipsClassifierAndReportsMatches) {
  testutil::TempDir dir;
  ModelBundle source(tiny_backbone(), head_config(HeadKind::Static, 8), 11);
  save_backbone_weights(source, dir / "bb.bin");
  WeightFile file = read_weight_file(dir / "bb.bin");
  const std::size_t arrays = file.arrays.size();
  file.arrays.emplace_back("fc.weight", Tensor({7, 16}, 9.0));
  file.arrays.emplace_back("fc.bias", Tensor({7}, 9.0));
  write_weight_file(dir / "bb_fc.bin", file);

  ModelBundle target(tiny_backbone(), head_config(HeadKind::Static, 8), 12);
  const LoadReport report = load_backbone_weights(target, dir / "bb_fc.bin");
  EXPECT_EQ(report.matched, arrays);
  EXPECT_TRUE(report.missing.empty());
  EXPECT_EQ(report.skipped, (std::vector<std::string>{"fc.weight", "fc.bias"}));
  const Tensor clip = frames(1, 2, 13);
  EXPECT_EQ(target.extract_features(clip), source.extract_features(clip));

  // Save and reload reproduces parameters exactly.
  save_backbone_weights(target, dir / "again.bin");
  ModelBundle third(tiny_backbone(), head_config(HeadKind::Static, 8), 14);
  load_backbone_weights(third, dir / "again.bin");
  EXPECT_EQ(third.extract_features(clip), source.extract_features(clip));
}

TEST(BackboneWeights, ReshapedArrayNamedInError) {
  testutil::TempDir dir;
  ModelBundle model(tiny_backbone(), head_config(HeadKind::Static, 8), 1);
  save_backbone_weights(model, dir / "bb.bin");
  WeightFile file = read_weight_file(dir / "bb.bin");
  auto it = std::find_if(file.arrays.begin(), file.arrays.end(), [](const auto& a) { return a.second.rank() > 1; });
  ASSERT_NE(it, file.arrays.end());
  auto& [name, tensor] = *it;
  const std::string bad = name;
  Tensor flat({tensor.size()});
  for (std::size_t i = 0; i < tensor.size(); ++i) flat[i] = tensor[i];
  tensor = flat;
  write_weight_file(dir / "bad.bin", file);
  try {
    load_backbone_weights(model, dir / "bad.bin");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_backbone_weights(model, dir / "missing.bin"), IoError);
}

TEST(WeightFile, RejectsCorruptFiles) {
  testutil::TempDir dir;
  WeightFile f;
  f.metadata["k"] = "v";
  f.arrays.emplace_back("a", Tensor({2, 3}, 1.5));
  write_weight_file(dir / "w.bin", f);
  const WeightFile g = read_weight_file(dir / "w.bin");
  EXPECT_EQ(g.metadata, f.metadata);
  ASSERT_NE(g.find("a"), nullptr);
  EXPECT_EQ(*g.find("a"), f.arrays[0].second);
  EXPECT_EQ(g.find("b"), nullptr);

  std::filesystem::resize_file(dir / "w.bin", std::filesystem::file_size(dir / "w.bin") - 4);
  EXPECT_THROW(read_weight_file(dir / "w.bin"), LoadError);
}
