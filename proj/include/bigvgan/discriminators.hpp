#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "bigvgan/conv.hpp"
#include "bigvgan/error.hpp"
#include "bigvgan/spectral.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

/// 2-D convolution with zero padding; weights out x in x kh x kw.
struct Conv2dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 1, kernel_w = 1;
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  Conv2dLayer() = default;
  Conv2dLayer(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw,
              std::size_t ph, std::size_t pw)
      : in_channels(in), out_channels(out), kernel_h(kh), kernel_w(kw), stride_h(sh), stride_w(sw), pad_h(ph),
        pad_w(pw), weights(in * out * kh * kw, 0.0f), bias(out, 0.0f) {
    if (in == 0 || out == 0 || kh == 0 || kw == 0 || sh == 0 || sw == 0)
      throw ConfigError("Conv2dLayer: dimensions must be positive");
  }

  std::size_t fan_in() const { return in_channels * kernel_h * kernel_w; }
  std::size_t out_height(std::size_t h) const {
    const std::size_t padded = h + 2 * pad_h;
    return padded < kernel_h ? 0 : (padded - kernel_h) / stride_h + 1;
  }
  std::size_t out_width(std::size_t w) const {
    const std::size_t padded = w + 2 * pad_w;
    return padded < kernel_w ? 0 : (padded - kernel_w) / stride_w + 1;
  }
};

inline Map2d conv2d(const Conv2dLayer& layer, const Map2d& input) {
  if (input.channels() != layer.in_channels)
    throw ConfigError("conv2d: input has " + std::to_string(input.channels()) + " channels, layer expects " +
                      std::to_string(layer.in_channels));
  const std::size_t H = input.height(), W = input.width();
  const std::size_t Ho = layer.out_height(H), Wo = layer.out_width(W);
  Map2d out(layer.out_channels, Ho, Wo);
  if (Ho == 0 || Wo == 0) return out;

  const std::size_t rows = layer.fan_in();
  const std::size_t positions = Ho * Wo;
  // im2col over blocks of output rows keeps the column buffer bounded.
  const std::size_t budget = std::size_t{1} << 22;
  const std::size_t rows_per_chunk = std::max<std::size_t>(1, budget / std::max<std::size_t>(1, rows * Wo));
  std::vector<float> col;

  Eigen::Map<const detail::RowMat> w(layer.weights.data(), layer.out_channels, rows);
  for (std::size_t y0 = 0; y0 < Ho; y0 += rows_per_chunk) {
    const std::size_t y1 = std::min(Ho, y0 + rows_per_chunk);
    const std::size_t P = (y1 - y0) * Wo;
    col.assign(rows * P, 0.0f);
    for (std::size_t c = 0; c < layer.in_channels; ++c)
      for (std::size_t ky = 0; ky < layer.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < layer.kernel_w; ++kx) {
          float* dst = col.data() + ((c * layer.kernel_h + ky) * layer.kernel_w + kx) * P;
          for (std::size_t oy = y0; oy < y1; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * layer.stride_h + ky) - static_cast<std::ptrdiff_t>(layer.pad_h);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t ox = 0; ox < Wo; ++ox) {
              const auto ix =
                  static_cast<std::ptrdiff_t>(ox * layer.stride_w + kx) - static_cast<std::ptrdiff_t>(layer.pad_w);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              dst[(oy - y0) * Wo + ox] = input(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
    Eigen::Map<const detail::RowMat> x(col.data(), rows, P);
    Eigen::Map<detail::RowMat, 0, Eigen::OuterStride<>> y(out.data().data() + y0 * Wo, layer.out_channels, P,
                                                          Eigen::OuterStride<>(positions));
    y.noalias() = w * x;
    for (std::size_t o = 0; o < layer.out_channels; ++o) y.row(o).array() += layer.bias[o];
  }
  return out;
}

inline Map2d leaky_relu(Map2d m, float slope) {
  for (auto& v : m.data()) v = v >= 0.0f ? v : slope * v;
  return m;
}

struct StftResolution {
  std::size_t n_fft, hop, win_length;
  bool operator==(const StftResolution&) const = default;
};

/// Multi-period discriminator hyperparameters.
struct MpdConfig {
  std::vector<std::size_t> periods = {2, 3, 5, 7, 11};
  std::vector<std::size_t> channels = {32, 128, 512, 1024, 1024};
  std::size_t kernel = 5;
  std::size_t stride = 3;
  std::size_t post_kernel = 3;
  float slope = 0.1f;
  bool operator==(const MpdConfig&) const = default;
};

/// Multi-resolution discriminator hyperparameters.
struct MrdConfig {
  std::vector<StftResolution> resolutions = {{1024, 120, 600}, {2048, 240, 1200}, {512, 50, 240}};
  std::size_t channels = 32;
  float slope = 0.1f;
  bool operator==(const MrdConfig&) const = default;
};

struct DiscriminatorConfig {
  MpdConfig mpd;
  MrdConfig mrd;

  nlohmann::json to_json() const {
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : mrd.resolutions) res.push_back({r.n_fft, r.hop, r.win_length});
    return {{"mpd_periods", mpd.periods}, {"mrd_resolutions", res}};
  }

  static DiscriminatorConfig from_json(const nlohmann::json& j) {
    DiscriminatorConfig c;
    try {
      if (j.contains("mpd_periods")) c.mpd.periods = j.at("mpd_periods").get<std::vector<std::size_t>>();
      if (j.contains("mrd_resolutions")) {
        c.mrd.resolutions.clear();
        for (const auto& r : j.at("mrd_resolutions")) {
          if (!r.is_array() || r.size() != 3) throw ConfigError("mrd_resolutions entries are [n_fft, hop, win]");
          c.mrd.resolutions.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>(), r[2].get<std::size_t>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("discriminator config: ") + e.what());
    }
    c.validate();
    return c;
  }

  void validate() const {
    for (auto p : mpd.periods)
      if (p == 0) throw ConfigError("mpd period must be >= 1");
    for (const auto& r : mrd.resolutions)
      if (r.win_length > r.n_fft || r.hop == 0) throw ConfigError("mrd resolution needs win <= n_fft and hop > 0");
  }
};

/// Score map plus every intermediate activation, final score last.
struct DiscriminatorOutput {
  Map2d score;
  std::vector<Map2d> features;
};

struct SubDiscriminator {
  std::vector<Conv2dLayer> convs;
  Conv2dLayer post;
  float slope = 0.1f;

  DiscriminatorOutput forward(Map2d x) const {
    DiscriminatorOutput out;
    for (const auto& c : convs) {
      x = leaky_relu(conv2d(c, x), slope);
      out.features.push_back(x);
    }
    out.score = conv2d(post, x);
    out.features.push_back(out.score);
    return out;
  }
};

/// Reflect-pad the tail up to a multiple of `period`, then fold into (1, ceil(T/p), p).
inline Map2d mpd_reshape(std::span<const float> audio, std::size_t period) {
  if (period == 0) throw ConfigError("mpd_reshape: period must be >= 1");
  if (audio.empty()) throw InputError("mpd_reshape: empty audio");
  const std::size_t height = (audio.size() + period - 1) / period;
  const auto padded = reflect_pad(audio, 0, height * period - audio.size());
  Map2d m(1, height, period);
  std::copy(padded.begin(), padded.end(), m.data().begin());
  return m;
}

struct Mpd {
  MpdConfig config;
  std::vector<SubDiscriminator> subs;
};

struct Mrd {
  MrdConfig config;
  std::vector<SubDiscriminator> subs;
};

namespace detail {

inline void randomize(Conv2dLayer& c, std::mt19937& rng, bool zero_bias) {
  const float bound = 1.0f / std::sqrt(static_cast<float>(c.fan_in()));
  auto draw = [&] { return (2.0f * static_cast<float>(rng() >> 8) * 0x1p-24f - 1.0f) * bound; };
  for (auto& v : c.weights) v = draw();
  for (auto& v : c.bias) v = zero_bias ? 0.0f : draw();
}

}  // namespace detail

inline Mpd build_mpd(const MpdConfig& cfg, std::uint64_t seed, bool zero_bias = false) {
  if (cfg.channels.empty()) throw ConfigError("mpd: empty channel list");
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed * 2654435761u + 17));
  Mpd mpd{cfg, {}};
  const std::size_t pad = cfg.kernel / 2;
  for (std::size_t s = 0; s < cfg.periods.size(); ++s) {
    SubDiscriminator sub;
    sub.slope = cfg.slope;
    std::size_t in = 1;
    for (auto ch : cfg.channels) {
      sub.convs.emplace_back(in, ch, cfg.kernel, 1, cfg.stride, 1, pad, 0);
      in = ch;
    }
    sub.post = Conv2dLayer(in, 1, cfg.post_kernel, 1, 1, 1, cfg.post_kernel / 2, 0);
    for (auto& c : sub.convs) detail::randomize(c, rng, zero_bias);
    detail::randomize(sub.post, rng, zero_bias);
    mpd.subs.push_back(std::move(sub));
  }
  return mpd;
}

inline Mrd build_mrd(const MrdConfig& cfg, std::uint64_t seed, bool zero_bias = false) {
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed * 40503u + 91));
  Mrd mrd{cfg, {}};
  const std::size_t ch = cfg.channels;
  for (std::size_t s = 0; s < cfg.resolutions.size(); ++s) {
    SubDiscriminator sub;
    sub.slope = cfg.slope;
    // Map layout is (1, frequency bins, frames): kernels are (freq, time), strides decimate time.
    sub.convs.emplace_back(1, ch, 3, 9, 1, 1, 1, 4);
    sub.convs.emplace_back(ch, ch, 3, 9, 1, 2, 1, 4);
    sub.convs.emplace_back(ch, ch, 3, 9, 1, 2, 1, 4);
    sub.convs.emplace_back(ch, ch, 3, 9, 1, 2, 1, 4);
    sub.convs.emplace_back(ch, ch, 3, 3, 1, 1, 1, 1);
    sub.post = Conv2dLayer(ch, 1, 3, 3, 1, 1, 1, 1);
    for (auto& c : sub.convs) detail::randomize(c, rng, zero_bias);
    detail::randomize(sub.post, rng, zero_bias);
    mrd.subs.push_back(std::move(sub));
  }
  return mrd;
}

inline std::vector<DiscriminatorOutput> mpd_forward(const Mpd& mpd, const AudioBuffer& audio) {
  if (audio.samples.empty()) throw InputError("mpd_forward: empty audio");
  std::vector<DiscriminatorOutput> outs;
  for (std::size_t s = 0; s < mpd.subs.size(); ++s)
    outs.push_back(mpd.subs[s].forward(mpd_reshape(audio.samples, mpd.config.periods[s])));
  return outs;
}

/// Linear magnitude spectrogram framed from sample 0 (no centering pad), as a (1, bins, frames) map.
inline Map2d mrd_spectrogram(const AudioBuffer& audio, const StftResolution& r) {
  const FeatureMap mag = stft_magnitude(audio, {r.n_fft, r.hop, r.win_length, StftPadding::kNone});
  Map2d m(1, mag.channels(), mag.frames());
  std::copy(mag.data().begin(), mag.data().end(), m.data().begin());
  return m;
}

inline std::vector<DiscriminatorOutput> mrd_forward(const Mrd& mrd, const AudioBuffer& audio) {
  std::size_t longest = 0;
  for (const auto& r : mrd.config.resolutions) longest = std::max(longest, r.n_fft);
  if (audio.size() < longest)
    throw InputError("mrd_forward: audio of " + std::to_string(audio.size()) + " samples is shorter than n_fft " +
                     std::to_string(longest));
  std::vector<DiscriminatorOutput> outs;
  for (std::size_t s = 0; s < mrd.subs.size(); ++s)
    outs.push_back(mrd.subs[s].forward(mrd_spectrogram(audio, mrd.config.resolutions[s])));
  return outs;
}

/// MPD and MRD together: K = |periods| + |resolutions| sub-discriminators.
struct Discriminators {
  Mpd mpd;
  Mrd mrd;

  static Discriminators build(const DiscriminatorConfig& cfg, std::uint64_t seed, bool zero_bias = false) {
    cfg.validate();
    return {build_mpd(cfg.mpd, seed, zero_bias), build_mrd(cfg.mrd, seed + 1, zero_bias)};
  }

  std::size_t size() const { return mpd.subs.size() + mrd.subs.size(); }

  /// MPD outputs first, then MRD outputs.
  std::vector<DiscriminatorOutput> forward(const AudioBuffer& audio) const {
    auto outs = mpd_forward(mpd, audio);
    auto r = mrd_forward(mrd, audio);
    outs.insert(outs.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    return outs;
  }
};

}  // namespace bigvgan
