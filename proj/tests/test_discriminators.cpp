#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace bigvgan;

namespace {

const Discriminators& discs() {
  static const Discriminators d = Discriminators::build({}, 3);
  return d;
}

/// Direct 2-D convolution with zero padding.
Map2d naive_conv2d(const Conv2dLayer& l, const Map2d& x) {
  Map2d y(l.out_channels, l.out_height(x.height()), l.out_width(x.width()));
  for (std::size_t o = 0; o < y.channels(); ++o)
    for (std::size_t r = 0; r < y.height(); ++r)
      for (std::size_t c = 0; c < y.width(); ++c) {
        double acc = l.bias[o];
        for (std::size_t i = 0; i < l.in_channels; ++i)
          for (std::size_t kh = 0; kh < l.kernel_h; ++kh)
            for (std::size_t kw = 0; kw < l.kernel_w; ++kw) {
              const auto yy = static_cast<std::ptrdiff_t>(r * l.stride_h + kh) - static_cast<std::ptrdiff_t>(l.pad_h);
              const auto xx = static_cast<std::ptrdiff_t>(c * l.stride_w + kw) - static_cast<std::ptrdiff_t>(l.pad_w);
              if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(x.height()) ||
                  xx >= static_cast<std::ptrdiff_t>(x.width()))
                continue;
              acc += static_cast<double>(l.weights[((o * l.in_channels + i) * l.kernel_h + kh) * l.kernel_w + kw]) *
                     x(i, yy, xx);
            }
        y(o, r, c) = static_cast<float>(acc);
      }
  return y;
}

}  // namespace

TEST(Conv2d, MatchesDirectOracle) {
  std::mt19937 rng(31);
  std::uniform_int_distribution<std::size_t> ch(1, 4), sz(1, 20), kk(1, 5), st(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t kh = kk(rng), kw = kk(rng);
    Conv2dLayer l(ch(rng), ch(rng), kh, kw, st(rng), st(rng), kh / 2, kw / 2);
    l.weights = oracle::uniform(rng, l.weights.size());
    l.bias = oracle::uniform(rng, l.bias.size());
    Map2d x(l.in_channels, sz(rng), sz(rng));
    x.data() = oracle::uniform(rng, x.size());
    const auto y = conv2d(l, x), ref = naive_conv2d(l, x);
    ASSERT_TRUE(y.same_shape(ref));
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      err = std::max(err, std::abs(static_cast<double>(y.data()[i]) - ref.data()[i]));
      scale = std::max(scale, std::abs(static_cast<double>(ref.data()[i])));
    }
    ASSERT_LE(err, 1e-5 * std::max(1.0, scale)) << "trial " << trial;
  }
}

TEST(MpdReshape, Shapes) {
  const auto x = testutil::noise(1, 8192);
  const auto m = mpd_reshape(x.samples, 5);
  EXPECT_EQ(m.height(), 1639u);
  EXPECT_EQ(m.width(), 5u);
  const std::vector<float> ten(10, 1.0f);
  EXPECT_EQ(mpd_reshape(ten, 2).height(), 5u);
  const std::vector<float> one{0.5f};
  const auto m1 = mpd_reshape(one, 3);
  EXPECT_EQ(m1.height(), 1u);
  EXPECT_EQ(m1.width(), 3u);
  EXPECT_EQ(m1.data(), (std::vector<float>{0.5f, 0.5f, 0.5f}));
}

TEST(MpdReshape, PrefixRecoversInputAndPadReflects) {
  const auto x = testutil::noise(2, 1001);
  for (std::size_t p : {2, 3, 5, 7, 11}) {
    const auto m = mpd_reshape(x.samples, p);
    EXPECT_GE(m.height() * p, x.size());
    EXPECT_LT(m.height() * p, x.size() + p);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(m.data()[i], x.samples[i]);
    for (std::size_t i = x.size(); i < m.size(); ++i) EXPECT_EQ(m.data()[i], x.samples[2 * (x.size() - 1) - i]);
  }
}

TEST(Mpd, StructureAndShapes) {
  const auto outs = mpd_forward(discs().mpd, testutil::noise(3, 8192));
  ASSERT_EQ(outs.size(), 5u);
  const std::size_t periods[] = {2, 3, 5, 7, 11};
  for (std::size_t s = 0; s < 5; ++s) {
    EXPECT_EQ(outs[s].features.size(), 6u);
    EXPECT_EQ(outs[s].score.channels(), 1u);
    EXPECT_EQ(outs[s].score.width(), periods[s]);
    EXPECT_EQ(outs[s].features.back(), outs[s].score);
    for (float v : outs[s].score.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Mpd, ZeroInputZeroBiasGivesZeroFeatures) {
  const auto d = Discriminators::build({}, 4, true);
  const auto outs = mpd_forward(d.mpd, testutil::audio(std::vector<float>(4096)));
  for (const auto& o : outs)
    for (const auto& f : o.features)
      for (float v : f.data()) ASSERT_EQ(v, 0.0f);
}

TEST(Mrd, SpectrogramFraming) {
  const auto s = mrd_spectrogram(testutil::noise(5, 8192), {1024, 120, 600});
  EXPECT_EQ(s.channels(), 1u);
  EXPECT_EQ(s.height(), 513u);
  EXPECT_EQ(s.width(), 60u);
  const auto silent = mrd_spectrogram(testutil::audio(std::vector<float>(4096)), {512, 50, 240});
  for (float v : silent.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Mrd, StructureAndErrors) {
  const auto outs = mrd_forward(discs().mrd, testutil::noise(6, 8192));
  ASSERT_EQ(outs.size(), 3u);
  for (const auto& o : outs) {
    EXPECT_EQ(o.features.size(), 6u);
    for (float v : o.score.data()) ASSERT_TRUE(std::isfinite(v));
  }
  EXPECT_THROW(mrd_forward(discs().mrd, testutil::noise(6, 2000)), InputError);
}

TEST(Discriminators, EightSubsAndPurity) {
  EXPECT_EQ(discs().size(), 8u);
  EXPECT_EQ(discs().size(), kSubDiscriminators);
  const auto x = testutil::noise(7, 6000);
  const auto a = discs().forward(x), b = discs().forward(x);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].score, b[k].score);
    EXPECT_DOUBLE_EQ(feature_matching_loss(a[k].features, b[k].features), 0.0);
  }
}

TEST(Discriminators, ConfigJson) {
  const DiscriminatorConfig c;
  const auto j = c.to_json();
  EXPECT_EQ(j["mpd_periods"], nlohmann::json({2, 3, 5, 7, 11}));
  EXPECT_EQ(j["mrd_resolutions"][1], nlohmann::json({2048, 240, 1200}));
  EXPECT_EQ(DiscriminatorConfig::from_json(j).mrd.resolutions, c.mrd.resolutions);
  EXPECT_THROW(DiscriminatorConfig::from_json({{"mrd_resolutions", {{512, 50, 1024}}}}), ConfigError);
}
