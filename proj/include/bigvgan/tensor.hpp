#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bigvgan/error.hpp"

namespace bigvgan {

/// Channels x frames activation, row-major. The carrier between every layer.
class FeatureMap {
 public:
  FeatureMap() = default;

  FeatureMap(std::size_t channels, std::size_t frames, float fill = 0.0f)
      : channels_(channels), frames_(frames), data_(channels * frames, fill) {
    if (channels == 0) throw ConfigError("FeatureMap: channels must be positive");
  }

  FeatureMap(std::size_t channels, std::size_t frames, std::vector<float> data)
      : channels_(channels), frames_(frames), data_(std::move(data)) {
    if (channels == 0) throw ConfigError("FeatureMap: channels must be positive");
    if (data_.size() != channels * frames)
      throw ConfigError("FeatureMap: data length " + std::to_string(data_.size()) +
                        " != channels*frames " + std::to_string(channels * frames));
  }

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t size() const { return data_.size(); }

  float& operator()(std::size_t c, std::size_t t) { return data_[c * frames_ + t]; }
  float operator()(std::size_t c, std::size_t t) const { return data_[c * frames_ + t]; }

  std::span<float> row(std::size_t c) { return {data_.data() + c * frames_, frames_}; }
  std::span<const float> row(std::size_t c) const { return {data_.data() + c * frames_, frames_}; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::vector<float> data_;
};

/// Mono waveform at a declared rate.
struct AudioBuffer {
  int sample_rate = 24000;
  std::vector<float> samples;

  AudioBuffer() = default;
  AudioBuffer(int rate, std::vector<float> s) : sample_rate(rate), samples(std::move(s)) {
    if (rate <= 0) throw ConfigError("AudioBuffer: sample_rate must be positive");
  }

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  /// View as a one-channel feature map.
  FeatureMap as_feature_map() const { return FeatureMap(1, samples.size(), samples); }
};

/// Channels x height x width map used by the 2-D discriminator stacks.
class Map2d {
 public:
  Map2d() = default;
  Map2d(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width), data_(channels * height * width, fill) {}

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float& operator()(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  float operator()(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Map2d& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  bool operator==(const Map2d&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

/// Mirror index into [0, n) with numpy "reflect" semantics, folding as often as needed.
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

/// Copy `in` into a buffer with `left`/`right` reflected samples on each side.
inline std::vector<float> reflect_pad(std::span<const float> in, std::size_t left, std::size_t right) {
  if (in.empty() && left + right > 0) throw ConfigError("reflect_pad: cannot reflect an empty signal");
  std::vector<float> out(in.size() + left + right);
  const auto n = in.size();
  for (std::size_t i = 0; i < left; ++i)
    out[i] = in[reflect_index(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(left), n)];
  std::copy(in.begin(), in.end(), out.begin() + static_cast<std::ptrdiff_t>(left));
  for (std::size_t i = left + n; i < out.size(); ++i)
    out[i] = in[reflect_index(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(left), n)];
  return out;
}

}  // namespace bigvgan
