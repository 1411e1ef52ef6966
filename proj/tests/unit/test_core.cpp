#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "test_util.hpp"
#include "vfer/core/errors.hpp"
#include "vfer/core/labels.hpp"
#include "vfer/core/numeric.hpp"
#include "vfer/core/random.hpp"
#include "vfer/core/tensor.hpp"

using namespace vfer;

TEST(Labels, StandardCoding) {
  EXPECT_EQ(decode_label(0), ExpressionLabel::Neutral);
  EXPECT_EQ(decode_label(4), ExpressionLabel::Happiness);
  EXPECT_EQ(decode_label(6), ExpressionLabel::Surprise);
  EXPECT_EQ(decode_label(-1), ExpressionLabel::Invalid);
  EXPECT_THROW(decode_label(7), ParseError);
  EXPECT_THROW(decode_label(-2), ParseError);
  for (int c = -1; c < kNumClasses; ++c) EXPECT_EQ(encode_label(decode_label(c)), c);
}

TEST(Labels, NamesRoundTrip) {
  for (auto label : kAllLabels) EXPECT_EQ(label_from_name(label_name(label)), label);
  EXPECT_THROW(label_from_name("Contempt"), ParseError);
}

TEST(LabelMap, SerializeParseRoundTrip) {
  const auto& standard = LabelMap::standard();
  EXPECT_EQ(LabelMap::parse(standard.serialize()), standard);
  const std::string permuted = "0,Happiness\n1,Neutral\n2,Anger\n3,Disgust\n4,Fear\n5,Sadness\n6,Surprise";
  const auto map = LabelMap::parse(permuted);
  EXPECT_EQ(map.decode(0), ExpressionLabel::Happiness);
  EXPECT_EQ(map.encode(ExpressionLabel::Neutral), 1);
  EXPECT_EQ(LabelMap::parse(map.serialize()), map);
}

TEST(LabelMap, RejectsMalformed) {
  EXPECT_THROW(LabelMap::parse("0,Neutral\n"), ParseError);  // missing codes
  EXPECT_THROW(LabelMap::parse(" 0,Neutral\n1,Anger\n2,Disgust\n3,Fear\n4,Happiness\n5,Sadness\n6,Surprise"),
               ParseError);
  EXPECT_THROW(LabelMap::parse("0,Neutral\n0,Anger\n2,Disgust\n3,Fear\n4,Happiness\n5,Sadness\n6,Surprise"),
               ParseError);
  EXPECT_THROW(LabelMap::parse("0,Neutral\n1,Anger\n2,Disgust\n3,Fear\n4,Happiness\n5,Sadness\n7,Surprise"),
               ParseError);
  try {
    LabelMap::parse("0,Neutral\n1,Anger\n2,Disgust\n3,Fear\n4,Happiness\n5,Sadness\n6,Smile");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(LabelMap, LoadMissingFileIsIoError) {
  EXPECT_THROW(LabelMap::load("/nonexistent/labels.csv"), IoError);
}

TEST(Softmax, MatchesHighPrecisionOracle) {
  // mpmath, 50 digits (tools/oracles/mp_values.py)
  const double expected[] = {0.05988464164509477,   0.1627833331876429,   0.44249097657996392, 0.022030328503149546,
                             0.0081045049385619525, 0.036321871203653972, 0.26838434394193294};
  const auto p = softmax(LogitVector{{1, 2, 3, 0, -1, 0.5, 2.5}});
  for (int c = 0; c < kNumClasses; ++c) EXPECT_NEAR(p[c], expected[c], 1e-15);
}

TEST(Softmax, UniformAndShiftInvariant) {
  const auto p = softmax(LogitVector{});
  for (double v : p.values) EXPECT_DOUBLE_EQ(v, 1.0 / 7.0);
  const auto big = softmax(LogitVector{{1000, 1001, 1002, 999, 998, 1000.5, 1001.5}});
  const auto small = softmax(LogitVector{{0, 1, 2, -1, -2, 0.5, 1.5}});
  for (int c = 0; c < kNumClasses; ++c) EXPECT_NEAR(big[c], small[c], 1e-15);
  EXPECT_THROW(softmax(LogitVector{{NAN, 0, 0, 0, 0, 0, 0}}), InvalidInputError);
  EXPECT_THROW(softmax(LogitVector{{INFINITY, 0, 0, 0, 0, 0, 0}}), InvalidInputError);
}

TEST(Softmax, SumsToOneOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    LogitVector z;
    for (auto& v : z.values) v = 20.0 * rng.normal();
    const auto p = softmax(z);
    EXPECT_NEAR(std::accumulate(p.values.begin(), p.values.end(), 0.0), 1.0, 1e-12);
    for (double v : p.values) EXPECT_GE(v, 0.0);
  }
}

TEST(Numeric, ArgmaxTiesGoLow) {
  const double row[] = {0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(argmax(row), 1u);
  EXPECT_EQ(predicted_code(ProbVector{{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7}}), 0);
}

TEST(Numeric, LogSumExp) {
  const double row[] = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(row), 1000.0 + std::log(2.0), 1e-12);
}

TEST(Tensor, ShapeAndIndexing) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  t.at({1, 2, 3}) = 5.0;
  EXPECT_EQ(t[23], 5.0);
  EXPECT_THROW(t.at({2, 0, 0}), InvalidInputError);
  EXPECT_THROW(t.reshape({5, 5}), InvalidInputError);
  t.reshape({6, 4});
  EXPECT_EQ(t.as_rows().rows(), 6);
  EXPECT_EQ(shape_string(t.shape()), "(6,4)");
}

TEST(Random, DeterministicStreams) {
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const auto k = c.below(7);
    EXPECT_LT(k, 7u);
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
