#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace bigvgan;

namespace {

/// Parameter count from the architecture description alone.
std::size_t expected_parameters(std::size_t h, const std::vector<std::size_t>& rates, bool alphas) {
  const std::vector<std::size_t> kernels{3, 7, 11};
  std::size_t n = 100 * h * 7 + h;
  std::size_t c = h;
  for (auto u : rates) {
    const std::size_t o = c / 2;
    n += c * o * 2 * u + o;
    for (auto k : kernels) n += 3 * (2 * (o * o * k + o) + (alphas ? 2 * o : 0));
    c = o;
  }
  return n + (alphas ? c : 0) + c * 7 + 1;
}

FeatureMap random_mel(std::uint32_t seed, std::size_t frames, float lo = -9.0f, float hi = 1.0f) {
  std::mt19937 rng(seed);
  return FeatureMap(100, frames, oracle::uniform(rng, 100 * frames, lo, hi));
}

GeneratorConfig tiny_config() {
  GeneratorConfig c;
  c.variant = "tiny";
  c.h = 8;
  c.upsample_rates = {16, 16};
  c.kernels = {3, 5};
  c.dilations = GeneratorConfig::default_dilations(2);
  c.n_mels = 4;
  c.use_filter = false;
  return c;
}

}  // namespace

TEST(Generator, ParameterCountsMatchTable) {
  const auto base = build_skeleton(GeneratorConfig::named("bigvgan-base"));
  const auto big = build_skeleton(GeneratorConfig::named("bigvgan"));
  EXPECT_EQ(count_parameters(base), expected_parameters(512, {8, 8, 2, 2}, true));
  EXPECT_EQ(count_parameters(big), expected_parameters(1536, {4, 4, 2, 2, 2, 2}, true));
  EXPECT_EQ(count_parameters(base), 14006369u);
  EXPECT_EQ(count_parameters(big), 112387273u);
  EXPECT_NEAR(count_parameters(base) / 1e6, 14.01, 14.01 * 0.02);
  EXPECT_NEAR(count_parameters(big) / 1e6, 112.4, 112.4 * 0.02);
}

TEST(Generator, AblationCounts) {
  EXPECT_EQ(count_parameters(build_skeleton(GeneratorConfig::named("bigvgan-base-nofilter"))), 14006369u);
  EXPECT_EQ(count_parameters(build_skeleton(GeneratorConfig::named("bigvgan-base-leaky"))),
            expected_parameters(512, {8, 8, 2, 2}, false));
}

TEST(Generator, SingleConvCount) {
  Conv1dLayer one(1, 1, 1);
  EXPECT_EQ(one.parameter_count(), 2u);
}

TEST(Generator, CanonicalNamesUniqueAndOrdered) {
  const auto g = build_skeleton(GeneratorConfig::named("bigvgan-base"));
  std::vector<std::string> names;
  visit_parameters(g, [&](const ParamView<const float>& p) { names.push_back(p.name); });
  EXPECT_EQ(names.front(), "pre.w");
  EXPECT_EQ(names[1], "pre.b");
  EXPECT_EQ(names[2], "stage0.up.w");
  EXPECT_EQ(names[4], "stage0.amp0.unit0.acta.alpha");
  EXPECT_EQ(names[5], "stage0.amp0.unit0.conva.w");
  EXPECT_EQ(names.back(), "post.conv.b");
  EXPECT_EQ(names[names.size() - 3], "post.act.alpha");
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
}

TEST(Generator, DeterministicInit) {
  const auto cfg = GeneratorConfig::named("bigvgan-base");
  const auto a = build_generator(cfg, 42), b = build_generator(cfg, 42), c = build_generator(cfg, 43);
  EXPECT_EQ(a.pre.weights, b.pre.weights);
  EXPECT_EQ(a.stages[2].blocks[1].units[2].conv_b.weights, b.stages[2].blocks[1].units[2].conv_b.weights);
  EXPECT_EQ(a.post_conv.weights, b.post_conv.weights);
  EXPECT_NE(a.pre.weights, c.pre.weights);
}

TEST(Generator, InitWithinFanInBound) {
  const auto g = build_generator(GeneratorConfig::named("bigvgan-base"), 1);
  visit_parameters(g, [&](const ParamView<const float>& p) {
    if (p.kind == ParamKind::kAlpha) {
      for (float v : p.data) ASSERT_EQ(v, 1.0f) << p.name;
      return;
    }
    const float bound = 1.0f / std::sqrt(static_cast<float>(p.fan_in));
    for (float v : p.data) ASSERT_LE(std::abs(v), bound) << p.name;
  });
}

TEST(Generator, LengthContract) {
  const auto g = build_generator(GeneratorConfig::named("bigvgan-base"), 7);
  for (std::size_t frames : {1, 2, 3, 5, 32}) {
    const auto y = generate(g, random_mel(frames, frames));
    EXPECT_EQ(y.size(), 256 * frames);
    EXPECT_EQ(y.sample_rate, 24000);
  }
}

TEST(Generator, AblationsPreserveShapes) {
  for (const char* name : {"bigvgan-base-nofilter", "bigvgan-base-leaky"}) {
    const auto g = build_generator(GeneratorConfig::named(name), 7);
    for (std::size_t frames : {1, 4}) EXPECT_EQ(generate(g, random_mel(3, frames)).size(), 256 * frames) << name;
  }
  const auto leaky = GeneratorConfig::named("bigvgan-leaky");
  EXPECT_FALSE(leaky.use_filter);
  EXPECT_EQ(leaky.activation, Activation::kLeakyRelu);
  EXPECT_FALSE(GeneratorConfig::named("bigvgan-nofilter").use_filter);
}

TEST(Generator, LargeVariantMinimalFrame) {
  const auto g = build_generator(GeneratorConfig::named("bigvgan"), 7);
  EXPECT_EQ(generate(g, random_mel(4, 1)).size(), 256u);
}

TEST(Generator, PureAndBounded) {
  const auto g = build_generator(GeneratorConfig::named("bigvgan-base"), 9);
  const auto mel = random_mel(10, 8, -60.0f, 60.0f);
  const auto a = generate(g, mel), b = generate(g, mel);
  EXPECT_EQ(a.samples, b.samples);
  for (float v : a.samples) {
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_LT(std::abs(v), 1.0f);
  }
}

TEST(Generator, BandMismatchRejected) {
  const auto g = build_generator(GeneratorConfig::named("bigvgan-base"), 9);
  EXPECT_THROW(generate(g, FeatureMap(80, 4)), ConfigError);
}

TEST(Generator, MatchesDoublePrecisionReference) {
  // Independent forward pass on a small unfiltered model: pre conv, per stage transposed conv then
  // the mean over blocks of residual (snake, conv d, snake, conv 1) units, snake, post conv, tanh.
  auto cfg = tiny_config();
  auto g = build_generator(cfg, 5);
  std::mt19937 rng(6);
  visit_parameters(g, [&](ParamView<float> p) {
    if (p.kind == ParamKind::kAlpha)
      for (auto& v : p.data) v = std::uniform_real_distribution<float>(0.5f, 2.0f)(rng);
  });
  const FeatureMap mel(4, 3, oracle::uniform(rng, 12, -2.0f, 1.0f));

  auto snake_all = [](oracle::Channels x, const SnakeParams& p) {
    for (std::size_t c = 0; c < x.size(); ++c)
      for (auto& v : x[c]) v = oracle::snake(v, p.alpha[c]);
    return x;
  };
  auto conv = [](const Conv1dLayer& l, const oracle::Channels& x, bool reflect) {
    return oracle::conv1d(l.weights, l.bias, l.in_channels, l.out_channels, l.kernel_size, l.dilation, true, reflect, x);
  };
  oracle::Channels x = conv(g.pre, testutil::to_channels(mel), false);
  for (const auto& st : g.stages) {
    x = oracle::transposed_conv1d(st.up.weights, st.up.bias, st.up.in_channels, st.up.out_channels,
                                  st.up.kernel_size, st.up.stride, st.up.padding, x);
    oracle::Channels acc(x.size(), oracle::Signal(x[0].size(), 0.0));
    for (const auto& block : st.blocks) {
      oracle::Channels h = x;
      for (const auto& unit : block.units) {
        auto t = conv(unit.conv_b, snake_all(conv(unit.conv_a, snake_all(h, unit.act_a), true), unit.act_b), true);
        for (std::size_t c = 0; c < h.size(); ++c)
          for (std::size_t i = 0; i < h[c].size(); ++i) h[c][i] += t[c][i];
      }
      for (std::size_t c = 0; c < h.size(); ++c)
        for (std::size_t i = 0; i < h[c].size(); ++i) acc[c][i] += h[c][i] / static_cast<double>(st.blocks.size());
    }
    x = acc;
  }
  auto out = conv(g.post_conv, snake_all(x, g.post_act), false);
  const auto y = generate(g, mel);
  ASSERT_EQ(y.size(), out[0].size());
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.samples[i], std::tanh(out[0][i]), 1e-5) << i;
}

TEST(GeneratorConfig, Validation) {
  auto c = GeneratorConfig::named("bigvgan-base");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.upsample_rates = {8, 8, 2};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.upsample_rates = {8, 8, 4, 1};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.kernels = {3, 4, 11};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.h = 500;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(GeneratorConfig::named("bigvgan-huge"), ConfigError);
}

TEST(GeneratorConfig, JsonRoundTrip) {
  for (const char* name : {"bigvgan-base", "bigvgan", "bigvgan-base-leaky"}) {
    const auto c = GeneratorConfig::named(name);
    const auto j = c.to_json();
    for (const char* key : {"variant", "h", "upsample_rates", "kernels", "dilations", "use_filter", "activation",
                            "n_mels", "sample_rate"})
      EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(GeneratorConfig::from_json(j), c);
  }
  auto j = GeneratorConfig::named("bigvgan").to_json();
  j.erase("kernels");
  EXPECT_THROW(GeneratorConfig::from_json(j), ConfigError);
}
