#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bigvgan/error.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

/// Per-channel Snake frequencies. Every entry must be strictly positive.
struct SnakeParams {
  std::vector<float> alpha;

  SnakeParams() = default;
  explicit SnakeParams(std::vector<float> a) : alpha(std::move(a)) {}
  /// All-ones initialization for `channels` channels.
  static SnakeParams ones(std::size_t channels) { return SnakeParams(std::vector<float>(channels, 1.0f)); }

  void check_against(std::size_t channels) const {
    if (alpha.size() != channels)
      throw ConfigError("snake: alpha has " + std::to_string(alpha.size()) + " entries for " +
                        std::to_string(channels) + " channels");
    for (std::size_t c = 0; c < alpha.size(); ++c)
      if (!(alpha[c] > 0.0f)) throw ConfigError("snake: alpha[" + std::to_string(c) + "] must be > 0");
  }
};

namespace detail {
inline constexpr std::size_t kSnakeBlock = 16;
using SnakeBlock = Eigen::Map<Eigen::Array<float, kSnakeBlock, 1>, Eigen::Unaligned>;

/// y = x + sin^2(a x) / a over one contiguous row, in place.
/// Fixed-size blocks keep every element on the same vectorized sin path; an unaligned dynamic
/// map would peel a pointer-dependent prefix onto scalar sin and break run-to-run reproducibility.
inline void snake_row(float* data, std::size_t n, float a) {
  const float inv = 1.0f / a;
  std::size_t i = 0;
  for (; i + kSnakeBlock <= n; i += kSnakeBlock) {
    SnakeBlock x(data + i);
    x += (a * x).sin().square() * inv;
  }
  if (i < n) {
    alignas(64) float tail[kSnakeBlock] = {};
    std::copy(data + i, data + n, tail);
    SnakeBlock x(tail);
    x += (a * x).sin().square() * inv;
    std::copy(tail, tail + (n - i), data + i);
  }
}
}  // namespace detail

inline FeatureMap snake(FeatureMap input, const SnakeParams& params) {
  params.check_against(input.channels());
  for (std::size_t c = 0; c < input.channels(); ++c)
    detail::snake_row(input.row(c).data(), input.frames(), params.alpha[c]);
  return input;
}

/// d/dx of snake: 1 + sin(2 a x).
inline FeatureMap snake_dx(FeatureMap input, const SnakeParams& params) {
  params.check_against(input.channels());
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const float a = params.alpha[c];
    for (auto& v : input.row(c)) v = 1.0f + std::sin(2.0f * a * v);
  }
  return input;
}

/// d/dalpha of snake: -sin^2(a x)/a^2 + x sin(2 a x)/a.
inline FeatureMap snake_dalpha(FeatureMap input, const SnakeParams& params) {
  params.check_against(input.channels());
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const float a = params.alpha[c];
    for (auto& v : input.row(c)) {
      const float s = std::sin(a * v);
      v = -s * s / (a * a) + v * std::sin(2.0f * a * v) / a;
    }
  }
  return input;
}

}  // namespace bigvgan
