#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "bigvgan/error.hpp"
#include "bigvgan/snake.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

/// Kaiser-windowed sinc low-pass FIR with its design record.
///
/// Frequencies are fractions of the sampling rate of the signal the taps run at
/// (the upsampled rate when used for resampling). `half_width` keeps the design
/// convention of the Kaiser formulas, which measure the transition half-width
/// against the Nyquist frequency; `passband_edge()` and `stopband_edge()` convert it.
struct LowPassFilter {
  std::vector<float> taps;
  int ratio = 2;
  std::size_t num_taps = 0;
  double beta = 0.0;
  double attenuation_db = 0.0;
  double half_width = 0.0;
  double cutoff = 0.0;
  /// Polyphase components of taps*ratio, phase-major: phase r holds taps[r + ratio*i]*ratio.
  std::vector<float> polyphase;

  double passband_edge() const { return cutoff - half_width / 2.0; }
  double stopband_edge() const { return cutoff + half_width / 2.0; }
  std::size_t taps_per_phase() const { return num_taps / static_cast<std::size_t>(ratio); }
};

namespace detail {

/// Modified Bessel function of the first kind, order zero (power series).
inline double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace detail

inline LowPassFilter design_kaiser_lowpass(int m) {
  if (m < 2) throw ConfigError("design_kaiser_lowpass: ratio must be >= 2, got " + std::to_string(m));
  LowPassFilter f;
  f.ratio = m;
  f.num_taps = static_cast<std::size_t>(6 * m);
  f.half_width = 0.6 / m;
  f.cutoff = 0.5 / m;
  const double n = static_cast<double>(f.num_taps);
  f.attenuation_db = 2.285 * (n / 2.0 - 1.0) * std::numbers::pi * 4.0 * f.half_width + 7.95;
  f.beta = 0.1102 * (f.attenuation_db - 8.7);

  // Evaluate one half and mirror so the taps are bit-symmetric.
  std::vector<double> h(f.num_taps);
  const double center = (n - 1.0) / 2.0;
  const double i0_beta = detail::bessel_i0(f.beta);
  for (std::size_t i = 0; i < (f.num_taps + 1) / 2; ++i) {
    const double r = (static_cast<double>(i) - center) / center;
    const double window = detail::bessel_i0(f.beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i] = detail::sinc(2.0 * f.cutoff * (static_cast<double>(i) - center)) * window;
    h[f.num_taps - 1 - i] = h[i];
  }
  double dc = 0.0;
  for (double v : h) dc += v;
  f.taps.resize(f.num_taps);
  for (std::size_t i = 0; i < f.num_taps; ++i) f.taps[i] = static_cast<float>(h[i] / dc);

  const std::size_t per = f.taps_per_phase();
  f.polyphase.resize(f.num_taps);
  for (int r = 0; r < m; ++r)
    for (std::size_t i = 0; i < per; ++i)
      f.polyphase[r * per + i] = static_cast<float>(h[r + m * i] / dc * m);
  return f;
}

/// |H(f)| of an FIR on an n_fft-point grid, bins 0..n_fft/2 (fraction of rate = bin/n_fft).
inline std::vector<double> magnitude_response(const std::vector<float>& taps, std::size_t n_fft) {
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t b = 0; b < mag.size(); ++b) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n_fft);
    for (std::size_t i = 0; i < taps.size(); ++i) acc += static_cast<double>(taps[i]) * std::polar(1.0, w * i);
    mag[b] = std::abs(acc);
  }
  return mag;
}

namespace detail {

// Upsampling geometry: reflect `pad` input samples per side, zero-stuff, filter with
// taps*ratio and crop `crop_left` samples. For n=6m this places the composite
// up->down delay at exactly zero.
inline std::size_t up_pad(const LowPassFilter& f) { return f.taps_per_phase() - 1; }
inline std::size_t up_crop_left(const LowPassFilter& f) {
  return up_pad(f) * f.ratio + (f.num_taps - f.ratio) / 2;
}

inline void upsample_row(std::span<const float> x, const LowPassFilter& f, float* out) {
  const std::size_t m = static_cast<std::size_t>(f.ratio);
  const std::size_t pad = up_pad(f);
  const std::size_t per = f.taps_per_phase();
  const auto xp = reflect_pad(x, pad, pad);
  const std::size_t crop = up_crop_left(f);
  const std::size_t frames = x.size();
  // Output m*t + s draws on polyphase branch (s + crop) % m, input offset t + (s + crop) / m.
  std::vector<float> acc(frames);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t r = (s + crop) % m;
    const std::size_t off = (s + crop) / m;
    const float* g = f.polyphase.data() + r * per;
    std::fill(acc.begin(), acc.end(), 0.0f);
    float* a = acc.data();
    for (std::size_t i = 0; i < per; ++i) {
      const float gi = g[i];
      const float* src = xp.data() + off - i;
      for (std::size_t t = 0; t < frames; ++t) a[t] += gi * src[t];
    }
    for (std::size_t t = 0; t < frames; ++t) out[m * t + s] = a[t];
  }
}

inline std::size_t down_frames(std::size_t frames, int ratio) {
  return (frames + static_cast<std::size_t>(ratio) - 1) / static_cast<std::size_t>(ratio);
}

inline void downsample_row(std::span<const float> x, const LowPassFilter& f, float* out) {
  const std::size_t m = static_cast<std::size_t>(f.ratio);
  const std::size_t n = f.num_taps;
  const std::size_t left = n / 2 - (n % 2 == 0 ? 1 : 0);
  const std::size_t right = n / 2;
  // Non-multiple lengths are completed with reflected samples before decimating.
  const std::size_t extra = (m - x.size() % m) % m;
  const auto xp = reflect_pad(x, left, right + extra + m);
  const std::size_t n_out = (x.size() + extra) / m;
  // De-interleave so every tap reads a contiguous branch.
  const std::size_t branch_len = xp.size() / m;
  std::vector<float> branches(m * branch_len);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t i = 0; i < branch_len; ++i) branches[b * branch_len + i] = xp[i * m + b];
  std::fill(out, out + n_out, 0.0f);
  for (std::size_t t = 0; t < n; ++t) {
    const float h = f.taps[t];
    const float* src = branches.data() + (t % m) * branch_len + t / m;
    for (std::size_t i = 0; i < n_out; ++i) out[i] += h * src[i];
  }
}

inline void require_ratio(const LowPassFilter& f, int m, const char* op) {
  if (f.ratio != m || f.num_taps % static_cast<std::size_t>(m) != 0)
    throw ConfigError(std::string(op) + ": filter must be designed for ratio " + std::to_string(m));
}

}  // namespace detail

inline FeatureMap upsample2x(const FeatureMap& input, const LowPassFilter& filter) {
  detail::require_ratio(filter, 2, "upsample2x");
  FeatureMap out(input.channels(), input.frames() * 2);
  if (input.frames() == 0) return out;
  for (std::size_t c = 0; c < input.channels(); ++c) detail::upsample_row(input.row(c), filter, out.row(c).data());
  return out;
}

inline FeatureMap downsample2x(const FeatureMap& input, const LowPassFilter& filter) {
  detail::require_ratio(filter, 2, "downsample2x");
  FeatureMap out(input.channels(), detail::down_frames(input.frames(), 2));
  if (input.frames() == 0) return out;
  for (std::size_t c = 0; c < input.channels(); ++c) detail::downsample_row(input.row(c), filter, out.row(c).data());
  return out;
}

/// downsample2x(snake(upsample2x(x))), fused per channel.
inline FeatureMap filtered_snake(const FeatureMap& input, const SnakeParams& params, const LowPassFilter& filter) {
  detail::require_ratio(filter, 2, "filtered_snake");
  params.check_against(input.channels());
  FeatureMap out(input.channels(), input.frames());
  if (input.frames() == 0) return out;
  std::vector<float> up(input.frames() * 2);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    detail::upsample_row(input.row(c), filter, up.data());
    detail::snake_row(up.data(), up.size(), params.alpha[c]);
    detail::downsample_row(up, filter, out.row(c).data());
  }
  return out;
}

}  // namespace bigvgan
