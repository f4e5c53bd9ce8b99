#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bigvgan/error.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

/// How the waveform is extended before framing.
enum class StftPadding {
  kReflect,  ///< (n_fft - hop)/2 reflected samples per side; L/hop frames when hop | L
  kNone,     ///< framing starts at sample 0
};

struct StftParams {
  std::size_t n_fft = 1024;
  std::size_t hop = 256;
  std::size_t win_length = 1024;
  StftPadding padding = StftPadding::kReflect;
};

/// Periodic Hann window of `win_length`, zero-extended and centered in `n_fft`.
inline std::vector<float> hann_window(std::size_t win_length, std::size_t n_fft) {
  std::vector<float> w(n_fft, 0.0f);
  const std::size_t offset = (n_fft - win_length) / 2;
  for (std::size_t i = 0; i < win_length; ++i)
    w[offset + i] = static_cast<float>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win_length));
  return w;
}

inline std::size_t stft_frame_count(std::size_t length, const StftParams& p) {
  const std::size_t pad = p.padding == StftPadding::kReflect ? (p.n_fft - p.hop) / 2 : 0;
  const std::size_t padded = length + 2 * pad;
  if (padded < p.n_fft) return 0;
  return (padded - p.n_fft) / p.hop + 1;
}

/// |STFT| as a bins x frames map (bins = n_fft/2 + 1).
inline FeatureMap stft_magnitude(std::span<const float> audio, const StftParams& p) {
  if (p.n_fft == 0 || p.hop == 0 || p.win_length == 0)
    throw ConfigError("stft_magnitude: n_fft, hop and win_length must be positive");
  if (p.win_length > p.n_fft) throw ConfigError("stft_magnitude: win_length exceeds n_fft");
  if (p.padding == StftPadding::kReflect && p.hop > p.n_fft)
    throw ConfigError("stft_magnitude: hop exceeds n_fft");
  const std::size_t pad = p.padding == StftPadding::kReflect ? (p.n_fft - p.hop) / 2 : 0;
  if (audio.empty() || audio.size() + 2 * pad < p.n_fft)
    throw InputError("stft_magnitude: audio of " + std::to_string(audio.size()) + " samples is shorter than " +
                     std::to_string(p.n_fft - 2 * pad));

  const std::vector<float> padded = pad > 0 ? reflect_pad(audio, pad, pad) : std::vector<float>(audio.begin(), audio.end());
  const std::size_t frames = stft_frame_count(audio.size(), p);
  const std::size_t bins = p.n_fft / 2 + 1;
  const auto window = hann_window(p.win_length, p.n_fft);

  FeatureMap mag(bins, frames);
  Eigen::FFT<float> fft;
  fft.SetFlag(Eigen::FFT<float>::HalfSpectrum);
  std::vector<float> frame(p.n_fft);
  std::vector<std::complex<float>> spec;
  for (std::size_t t = 0; t < frames; ++t) {
    const float* src = padded.data() + t * p.hop;
    for (std::size_t i = 0; i < p.n_fft; ++i) frame[i] = src[i] * window[i];
    fft.fwd(spec, frame);
    for (std::size_t b = 0; b < bins; ++b) mag(b, t) = std::abs(spec[b]);
  }
  return mag;
}

inline FeatureMap stft_magnitude(const AudioBuffer& audio, const StftParams& p) {
  return stft_magnitude(std::span<const float>(audio.samples), p);
}

}  // namespace bigvgan
