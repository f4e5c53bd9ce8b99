#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace bigvgan;
using testutil::rel_error;
using testutil::to_channels;

TEST(Conv1d, PointwiseScaling) {
  Conv1dLayer layer(1, 1, 1, 1, 1, {2.0f}, {0.0f});
  const auto y = conv1d(layer, FeatureMap(1, 3, {1, 2, 3}), PaddingMode::kSameZero);
  EXPECT_EQ(y.data(), (std::vector<float>{2, 4, 6}));
}

TEST(Conv1d, ZeroPaddedDifference) {
  Conv1dLayer layer(1, 1, 3, 1, 1, {1.0f, 0.0f, -1.0f}, {0.0f});
  const auto y = conv1d(layer, FeatureMap(1, 4, {1, 2, 3, 4}), PaddingMode::kSameZero);
  EXPECT_EQ(y.data(), (std::vector<float>{-2, -2, -2, 3}));
}

TEST(Conv1d, SamePaddingKeepsLength) {
  for (std::size_t k : {1, 3, 5, 7, 11})
    for (std::size_t d : {1, 2, 3, 5}) {
      if ((k - 1) * d % 2) continue;
      Conv1dLayer layer(2, 3, k, d);
      for (auto mode : {PaddingMode::kSameZero, PaddingMode::kSameReflect})
        EXPECT_EQ(conv1d(layer, FeatureMap(2, 8, 0.5f), mode).frames(), 8u) << "k=" << k << " d=" << d;
    }
}

TEST(Conv1d, OddSpanRejectedUnderSamePadding) {
  Conv1dLayer layer(1, 1, 4, 1);
  EXPECT_THROW(conv1d(layer, FeatureMap(1, 8), PaddingMode::kSameZero), ConfigError);
  EXPECT_NO_THROW(conv1d(layer, FeatureMap(1, 8), PaddingMode::kNone));
}

TEST(Conv1d, ChannelMismatchRejected) {
  Conv1dLayer layer(3, 1, 3);
  EXPECT_THROW(conv1d(layer, FeatureMap(2, 8), PaddingMode::kSameZero), ConfigError);
}

TEST(Conv1d, MatchesNestedLoopOracle) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> ch(1, 4), fr(1, 64), kk(1, 11), dd(1, 5);
  int checked = 0;
  while (checked < 200) {
    const std::size_t in = ch(rng), out = ch(rng), k = kk(rng), d = dd(rng), T = fr(rng);
    const bool same = rng() % 4 != 0;
    if (same && (k - 1) * d % 2) continue;
    if (!same && T <= (k - 1) * d) continue;
    const bool reflect = rng() % 2;
    Conv1dLayer layer(in, out, k, d, 1, oracle::uniform(rng, in * out * k), oracle::uniform(rng, out));
    const FeatureMap x(in, T, oracle::uniform(rng, in * T));
    const auto mode = !same ? PaddingMode::kNone : reflect ? PaddingMode::kSameReflect : PaddingMode::kSameZero;
    const auto y = conv1d(layer, x, mode);
    const auto ref = oracle::conv1d(layer.weights, layer.bias, in, out, k, d, same, reflect, to_channels(x));
    ASSERT_EQ(y.frames(), ref[0].size());
    ASSERT_LE(rel_error(y, ref), 1e-5) << "in=" << in << " out=" << out << " k=" << k << " d=" << d << " T=" << T;
    ++checked;
  }
}

TEST(Conv1d, Linear) {
  std::mt19937 rng(5);
  Conv1dLayer layer(3, 2, 5, 2, 1, oracle::uniform(rng, 30), std::vector<float>(2, 0.0f));
  const FeatureMap x(3, 40, oracle::uniform(rng, 120)), z(3, 40, oracle::uniform(rng, 120));
  const float a = 0.7f, b = -1.3f;
  FeatureMap mix(3, 40);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * z.data()[i];
  for (auto mode : {PaddingMode::kSameZero, PaddingMode::kSameReflect}) {
    const auto lhs = conv1d(layer, mix, mode);
    const auto yx = conv1d(layer, x, mode), yz = conv1d(layer, z, mode);
    for (std::size_t i = 0; i < lhs.size(); ++i)
      EXPECT_NEAR(lhs.data()[i], a * yx.data()[i] + b * yz.data()[i], 1e-5);
  }
}

TEST(TransposedConv1d, LengthFormula) {
  TransposedConv1dLayer layer(1, 1, 16, 8, 4);
  EXPECT_EQ(transposed_conv1d(layer, FeatureMap(1, 32)).frames(), 256u);
  for (std::size_t u : {1, 2, 4, 8})
    for (std::size_t k : {u, 2 * u, 2 * u + 1, 3 * u})
      for (std::size_t p = 0; 2 * p <= k; ++p)
        for (std::size_t T : {1, 2, 7, 33}) {
          TransposedConv1dLayer l(2, 1, k, u, p);
          EXPECT_EQ(transposed_conv1d(l, FeatureMap(2, T)).frames(), (T - 1) * u + k - 2 * p);
        }
}

TEST(TransposedConv1d, ImpulseResponseIsShiftedKernel) {
  TransposedConv1dLayer layer(1, 1, 4, 2, 1);
  layer.weights = {1, 2, 3, 4};
  const auto y = transposed_conv1d(layer, FeatureMap(1, 3, {0, 1, 0}));
  // The kernel stamped at 1*u - p = 1.
  EXPECT_EQ(y.data(), (std::vector<float>{0, 1, 2, 3, 4, 0}));
}

TEST(TransposedConv1d, UnitStrideIdentity) {
  TransposedConv1dLayer layer(1, 1, 1, 1, 0);
  layer.weights = {1.0f};
  const FeatureMap x(1, 5, {1, -2, 3, -4, 5});
  EXPECT_EQ(transposed_conv1d(layer, x), x);
}

TEST(TransposedConv1d, MatchesScatterAddOracle) {
  std::mt19937 rng(12);
  std::uniform_int_distribution<std::size_t> ch(1, 4), fr(1, 64), uu(1, 8);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t in = ch(rng), out = ch(rng), u = uu(rng), T = fr(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 11)(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, k / 2)(rng);
    TransposedConv1dLayer layer(in, out, k, u, p);
    layer.weights = oracle::uniform(rng, in * out * k);
    layer.bias = oracle::uniform(rng, out);
    const FeatureMap x(in, T, oracle::uniform(rng, in * T));
    const auto y = transposed_conv1d(layer, x);
    const auto ref = oracle::transposed_conv1d(layer.weights, layer.bias, in, out, k, u, p, to_channels(x));
    ASSERT_EQ(y.frames(), ref[0].size());
    ASSERT_LE(rel_error(y, ref), 1e-5) << "u=" << u << " k=" << k << " p=" << p << " T=" << T;
  }
}

TEST(TransposedConv1d, ChannelMismatchRejected) {
  EXPECT_THROW(transposed_conv1d(TransposedConv1dLayer(2, 1, 4, 2, 1), FeatureMap(3, 4)), ConfigError);
}

TEST(LeakyRelu, Definition) {
  EXPECT_EQ(leaky_relu(FeatureMap(1, 3, {-1, 0, 2}), 0.1f).data(), (std::vector<float>{-0.1f, 0, 2}));
  EXPECT_EQ(leaky_relu(FeatureMap(1, 3, {-1, 0, 2}), 0.0f).data(), (std::vector<float>{0, 0, 2}));
  const FeatureMap x(1, 4, {-3, -0.5f, 0.25f, 9});
  EXPECT_EQ(leaky_relu(x, 1.0f), x);
  EXPECT_THROW(leaky_relu(x, -0.1f), ConfigError);
}

TEST(TanhClamp, Range) {
  const auto y = tanh_clamp(FeatureMap(1, 5, {0.0f, 0.5f, 30.0f, -30.0f, 1e30f}));
  EXPECT_EQ(y(0, 0), 0.0f);
  EXPECT_NEAR(y(0, 1), 0.462117157, 1e-7);
  for (float v : y.data()) {
    EXPECT_LT(v, 1.0f);
    EXPECT_GT(v, -1.0f);
  }
}

TEST(FeatureMap, ShapeInvariant) {
  EXPECT_THROW(FeatureMap(2, 3, std::vector<float>(5)), ConfigError);
  EXPECT_THROW(FeatureMap(0, 3), ConfigError);
  EXPECT_EQ(FeatureMap(2, 0).size(), 0u);
}

TEST(ReflectPad, NumpyReflectSemantics) {
  const std::vector<float> x{1, 2, 3};
  EXPECT_EQ(reflect_pad(x, 2, 2), (std::vector<float>{3, 2, 1, 2, 3, 2, 1}));
  // Padding longer than the signal keeps folding.
  EXPECT_EQ(reflect_pad(x, 5, 0), (std::vector<float>{2, 1, 2, 3, 2, 1, 2, 3}));
  const std::vector<float> one{7};
  EXPECT_EQ(reflect_pad(one, 2, 3), std::vector<float>(6, 7));
}
