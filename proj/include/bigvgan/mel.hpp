#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bigvgan/error.hpp"
#include "bigvgan/io_bytes.hpp"
#include "bigvgan/spectral.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

struct MelConfig {
  int sample_rate = 24000;
  std::size_t n_fft = 1024;
  std::size_t win_length = 1024;
  std::size_t hop = 256;
  std::size_t n_mels = 100;
  double fmin = 0.0;
  double fmax = 12000.0;
  float log_clamp_floor = 1e-5f;

  StftParams stft() const { return {n_fft, hop, win_length, StftPadding::kReflect}; }

  void validate() const {
    if (sample_rate <= 0) throw ConfigError("MelConfig: sample_rate must be positive");
    if (fmax > sample_rate / 2.0) throw ConfigError("MelConfig: fmax above Nyquist");
    if (fmin < 0.0 || fmin >= fmax) throw ConfigError("MelConfig: need 0 <= fmin < fmax");
    if (n_mels == 0) throw ConfigError("MelConfig: n_mels must be positive");
    if (win_length > n_fft) throw ConfigError("MelConfig: win_length exceeds n_fft");
  }

  bool operator==(const MelConfig&) const = default;
};

/// Natural-log mel magnitudes, bands x frames.
struct MelSpectrogram {
  FeatureMap values;

  std::size_t bands() const { return values.channels(); }
  std::size_t frames() const { return values.frames(); }
};

// Slaney mel scale: linear below 1 kHz, logarithmic above.
inline double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

inline double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

/// Triangular, area-normalized filters: n_mels rows over n_fft/2 + 1 bins.
inline FeatureMap mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const std::size_t bins = cfg.n_fft / 2 + 1;
  std::vector<double> edges(cfg.n_mels + 2);
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.fmax);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));

  FeatureMap fb(cfg.n_mels, bins);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate / static_cast<double>(cfg.n_fft);
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(up, down));
      fb(m, b) = static_cast<float>(w * norm);
    }
  }
  return fb;
}

/// Waveform to log-mel converter with its filterbank built once.
class MelFrontend {
 public:
  explicit MelFrontend(MelConfig cfg = {}) : cfg_(cfg), filterbank_(mel_filterbank(cfg_)) {}

  const MelConfig& config() const { return cfg_; }
  const FeatureMap& filterbank() const { return filterbank_; }

  MelSpectrogram operator()(const AudioBuffer& audio) const {
    if (audio.sample_rate != cfg_.sample_rate)
      throw InputError("mel_spectrogram: expected " + std::to_string(cfg_.sample_rate) + " Hz audio, got " +
                       std::to_string(audio.sample_rate));
    const FeatureMap mag = stft_magnitude(audio, cfg_.stft());
    FeatureMap mel(cfg_.n_mels, mag.frames());
    using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> fb(filterbank_.data().data(), filterbank_.channels(), filterbank_.frames());
    Eigen::Map<const RowMat> m(mag.data().data(), mag.channels(), mag.frames());
    Eigen::Map<RowMat> out(mel.data().data(), mel.channels(), mel.frames());
    out.noalias() = fb * m;
    for (auto& v : mel.data()) v = std::log(std::max(v, cfg_.log_clamp_floor));
    return {std::move(mel)};
  }

 private:
  MelConfig cfg_;
  FeatureMap filterbank_;
};

inline MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& cfg = {}) {
  return MelFrontend(cfg)(audio);
}

// BVGM: "BVGM", u32 version=1, u32 bands, u32 frames, f32[bands*frames] row-major, little-endian.
inline constexpr char kMelMagic[4] = {'B', 'V', 'G', 'M'};
inline constexpr std::uint32_t kMelVersion = 1;

inline std::string encode_mel(const MelSpectrogram& mel) {
  ByteWriter w;
  w.raw(kMelMagic, 4);
  w.u32(kMelVersion);
  w.u32(static_cast<std::uint32_t>(mel.bands()));
  w.u32(static_cast<std::uint32_t>(mel.frames()));
  w.f32s(mel.values.data());
  return w.take();
}

inline MelSpectrogram decode_mel(std::string_view bytes) {
  ByteReader r(bytes, "mel file");
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMelMagic, 4) != 0) throw FormatError("mel file: bad magic");
  if (const auto v = r.u32(); v != kMelVersion) throw FormatError("mel file: unsupported version " + std::to_string(v));
  const std::uint32_t bands = r.u32();
  const std::uint32_t frames = r.u32();
  if (bands == 0) throw FormatError("mel file: zero bands");
  std::vector<float> data = r.f32s(static_cast<std::size_t>(bands) * frames);
  if (!r.at_end()) throw FormatError("mel file: trailing bytes");
  return {FeatureMap(bands, frames, std::move(data))};
}

inline void write_mel(const std::string& path, const MelSpectrogram& mel) { write_file(path, encode_mel(mel)); }
inline MelSpectrogram read_mel(const std::string& path) { return decode_mel(read_file(path)); }

}  // namespace bigvgan
