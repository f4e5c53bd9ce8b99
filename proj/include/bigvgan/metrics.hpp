#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bigvgan/discriminators.hpp"
#include "bigvgan/error.hpp"
#include "bigvgan/mel.hpp"
#include "bigvgan/spectral.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

struct MetricReport {
  double m_stft = 0.0;
  double mcd = 0.0;
  double periodicity_rmse = 0.0;
  double vuv_f1 = 1.0;
  double mae = 0.0;

  nlohmann::json to_json() const {
    return {{"m_stft", m_stft}, {"mcd", mcd}, {"periodicity_rmse", periodicity_rmse}, {"vuv_f1", vuv_f1}, {"mae", mae}};
  }
};

/// Trim both signals to their common length. Returns true if anything was cut.
inline bool trim_to_common(AudioBuffer& a, AudioBuffer& b) {
  const std::size_t n = std::min(a.size(), b.size());
  const bool cut = a.size() != n || b.size() != n;
  a.samples.resize(n);
  b.samples.resize(n);
  return cut;
}

inline const std::vector<StftResolution>& m_stft_resolutions() {
  static const std::vector<StftResolution> r = MrdConfig{}.resolutions;
  return r;
}

/// Multi-resolution STFT distance: mean over resolutions of spectral convergence + log-magnitude L1.
inline double m_stft(AudioBuffer ref, AudioBuffer deg) {
  trim_to_common(ref, deg);
  constexpr float kFloor = 1e-7f;
  double total = 0.0;
  const auto& resolutions = m_stft_resolutions();
  for (const auto& r : resolutions) {
    const StftParams p{r.n_fft, r.hop, r.win_length, StftPadding::kNone};
    const FeatureMap a = stft_magnitude(ref, p);
    const FeatureMap b = stft_magnitude(deg, p);
    double diff2 = 0.0, ref2 = 0.0, log_l1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a.data()[i], y = b.data()[i];
      diff2 += (x - y) * (x - y);
      ref2 += x * x;
      log_l1 += std::abs(std::log(std::max(a.data()[i], kFloor)) - std::log(std::max(b.data()[i], kFloor)));
    }
    if (ref2 == 0.0) throw InputError("m_stft: reference has zero spectral energy");
    total += std::sqrt(diff2) / std::sqrt(ref2) + log_l1 / static_cast<double>(a.size());
  }
  return total / static_cast<double>(resolutions.size());
}

inline constexpr std::size_t kCepstralOrder = 13;

/// 10 * sqrt(2) / ln(10), the dB scaling of cepstral distance.
inline constexpr double kMcdScale = 10.0 * std::numbers::sqrt2 / std::numbers::ln10;

/// Orthonormal DCT-II of each log-mel frame, keeping coefficients 1..order (c0 dropped).
inline FeatureMap mel_cepstra(const MelSpectrogram& mel, std::size_t order = kCepstralOrder) {
  const std::size_t n = mel.bands();
  if (order >= n) throw ConfigError("mel_cepstra: order must be below the band count");
  FeatureMap out(order, mel.frames());
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 1; k <= order; ++k) {
    std::vector<double> basis(n);
    for (std::size_t i = 0; i < n; ++i)
      basis[i] = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * i + 1.0) / (2.0 * n));
    for (std::size_t t = 0; t < mel.frames(); ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += basis[i] * mel.values(i, t);
      out(k - 1, t) = static_cast<float>(acc);
    }
  }
  return out;
}

inline FeatureMap mel_cepstra(const AudioBuffer& audio, const MelConfig& cfg = {}) {
  return mel_cepstra(mel_spectrogram(audio, cfg));
}

/// Cost and step count of the minimum-cost monotone alignment between two frame sequences.
struct DtwResult {
  double total_cost = 0.0;
  std::size_t path_length = 0;
};

inline DtwResult dtw_euclidean(const FeatureMap& a, const FeatureMap& b) {
  if (a.channels() != b.channels()) throw ConfigError("dtw: feature dimension mismatch");
  const std::size_t n = a.frames(), m = b.frames();
  if (n == 0 || m == 0) throw InputError("dtw: empty sequence");
  auto cost = [&](std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
      const double d = static_cast<double>(a(c, i)) - b(c, j);
      acc += d * d;
    }
    return std::sqrt(acc);
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  std::vector<std::size_t> len(n * m, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(i, j);
      if (i == 0 && j == 0) {
        acc[0] = c;
        len[0] = 1;
        continue;
      }
      // Prefer the diagonal on ties so identical sequences align one-to-one.
      double best = kInf;
      std::size_t best_len = 0;
      auto consider = [&](std::size_t idx) {
        if (acc[idx] < best) {
          best = acc[idx];
          best_len = len[idx];
        }
      };
      if (i > 0 && j > 0) consider((i - 1) * m + (j - 1));
      if (i > 0) consider((i - 1) * m + j);
      if (j > 0) consider(i * m + (j - 1));
      acc[i * m + j] = best + c;
      len[i * m + j] = best_len + 1;
    }
  return {acc.back(), len.back()};
}

/// Mel-cepstral distortion (dB) along the DTW path between two cepstral sequences.
inline double mcd_from_cepstra(const FeatureMap& ref, const FeatureMap& deg) {
  const DtwResult r = dtw_euclidean(ref, deg);
  return kMcdScale * r.total_cost / static_cast<double>(r.path_length);
}

inline double mcd_dtw(const AudioBuffer& ref, const AudioBuffer& deg, const MelConfig& cfg = {}) {
  return mcd_from_cepstra(mel_cepstra(ref, cfg), mel_cepstra(deg, cfg));
}

struct PitchConfig {
  std::size_t frame = 1024;
  std::size_t hop = 256;
  double fmin = 50.0;
  double fmax = 1000.0;
  double threshold = 0.25;
};

/// Per-frame YIN estimates. f0 is 0 exactly when the frame is unvoiced.
struct PitchTrack {
  std::vector<double> f0;
  std::vector<double> periodicity;
  std::vector<bool> voiced;

  std::size_t frames() const { return f0.size(); }
};

inline PitchTrack pitch_track(const AudioBuffer& audio, const PitchConfig& cfg = {}) {
  const double sr = audio.sample_rate;
  const auto tau_min = static_cast<std::size_t>(std::floor(sr / cfg.fmax));
  const auto tau_max = static_cast<std::size_t>(std::ceil(sr / cfg.fmin));
  if (tau_min < 1 || tau_max >= cfg.frame) throw ConfigError("pitch_track: lag range does not fit the frame");
  if (audio.size() < cfg.frame)
    throw InputError("pitch_track: need at least " + std::to_string(cfg.frame) + " samples");
  const std::size_t window = cfg.frame - tau_max;
  const std::size_t frames = (audio.size() - cfg.frame) / cfg.hop + 1;

  PitchTrack track;
  std::vector<double> diff(tau_max + 1), cmnd(tau_max + 1);
  for (std::size_t f = 0; f < frames; ++f) {
    const float* x = audio.samples.data() + f * cfg.hop;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < window; ++j) {
        const double d = static_cast<double>(x[j]) - x[j + tau];
        acc += d * d;
      }
      diff[tau] = acc;
    }
    double running = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
    }

    std::size_t argmin = tau_min;
    for (std::size_t tau = tau_min; tau <= tau_max; ++tau)
      if (cmnd[tau] < cmnd[argmin]) argmin = tau;
    const double cmnd_min = cmnd[argmin];
    const bool voiced = cmnd_min < cfg.threshold;

    double f0 = 0.0;
    if (voiced) {
      // First dip under the threshold, followed down to its local minimum.
      std::size_t tau = tau_min;
      while (cmnd[tau] >= cfg.threshold) ++tau;
      while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
      double refined = static_cast<double>(tau);
      if (tau > tau_min && tau < tau_max) {
        const double a = cmnd[tau - 1], b = cmnd[tau], c = cmnd[tau + 1];
        const double denom = a - 2.0 * b + c;
        if (denom > 0.0) refined += 0.5 * (a - c) / denom;
      }
      f0 = sr / refined;
    }
    track.f0.push_back(f0);
    track.periodicity.push_back(std::clamp(1.0 - cmnd_min, 0.0, 1.0));
    track.voiced.push_back(voiced);
  }
  return track;
}

/// RMS periodicity difference over frames voiced in either track, and F1 of deg's voicing against ref's.
inline std::pair<double, double> periodicity_error_and_vuv_f1(const PitchTrack& ref, const PitchTrack& deg) {
  if (ref.frames() == 0 || deg.frames() == 0) throw InputError("periodicity: zero frames");
  if (ref.frames() != deg.frames())
    throw ConfigError("periodicity: frame count mismatch " + std::to_string(ref.frames()) + " vs " +
                      std::to_string(deg.frames()));
  double sq = 0.0;
  std::size_t counted = 0, tp = 0, ref_pos = 0, deg_pos = 0;
  for (std::size_t i = 0; i < ref.frames(); ++i) {
    const bool r = ref.voiced[i], d = deg.voiced[i];
    if (r || d) {
      const double e = ref.periodicity[i] - deg.periodicity[i];
      sq += e * e;
      ++counted;
    }
    tp += (r && d) ? 1 : 0;
    ref_pos += r ? 1 : 0;
    deg_pos += d ? 1 : 0;
  }
  const double rmse = counted ? std::sqrt(sq / static_cast<double>(counted)) : 0.0;
  double f1;
  if (ref_pos == 0 && deg_pos == 0) {
    f1 = 1.0;
  } else if (tp == 0) {
    f1 = 0.0;
  } else {
    const double precision = static_cast<double>(tp) / static_cast<double>(deg_pos);
    const double recall = static_cast<double>(tp) / static_cast<double>(ref_pos);
    f1 = 2.0 * precision * recall / (precision + recall);
  }
  return {rmse, f1};
}

inline std::pair<double, double> periodicity_error_and_vuv_f1(const AudioBuffer& ref, const AudioBuffer& deg) {
  AudioBuffer a = ref, b = deg;
  trim_to_common(a, b);
  return periodicity_error_and_vuv_f1(pitch_track(a), pitch_track(b));
}

inline double mae(AudioBuffer ref, AudioBuffer deg) {
  trim_to_common(ref, deg);
  if (ref.size() == 0) throw InputError("mae: empty signals");
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) acc += std::abs(static_cast<double>(ref.samples[i]) - deg.samples[i]);
  return acc / static_cast<double>(ref.size());
}

/// Full objective suite on a reference/degraded pair (trimmed to their common length).
inline MetricReport evaluate_metrics(AudioBuffer ref, AudioBuffer deg) {
  if (ref.sample_rate != deg.sample_rate) throw InputError("metrics: sample rate mismatch");
  trim_to_common(ref, deg);
  MetricReport r;
  r.m_stft = m_stft(ref, deg);
  MelConfig mel_cfg;
  mel_cfg.sample_rate = ref.sample_rate;
  mel_cfg.fmax = std::min(mel_cfg.fmax, ref.sample_rate / 2.0);
  r.mcd = mcd_dtw(ref, deg, mel_cfg);
  std::tie(r.periodicity_rmse, r.vuv_f1) = periodicity_error_and_vuv_f1(ref, deg);
  r.mae = mae(ref, deg);
  return r;
}

}  // namespace bigvgan
