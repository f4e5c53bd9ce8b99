#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bigvgan/error.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

namespace detail {
using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DynStride = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
using StridedMap = Eigen::Map<RowMat, 0, DynStride>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, DynStride>;
}  // namespace detail

enum class PaddingMode { kSameReflect, kSameZero, kNone };

/// Forward 1-D convolution, weights laid out out x in x k.
struct Conv1dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 1;
  std::size_t dilation = 1;
  std::size_t stride = 1;
  std::vector<float> weights;
  std::vector<float> bias;

  Conv1dLayer() = default;
  Conv1dLayer(std::size_t in, std::size_t out, std::size_t k, std::size_t d = 1, std::size_t s = 1)
      : in_channels(in), out_channels(out), kernel_size(k), dilation(d), stride(s),
        weights(in * out * k, 0.0f), bias(out, 0.0f) {
    validate();
  }
  Conv1dLayer(std::size_t in, std::size_t out, std::size_t k, std::size_t d, std::size_t s,
              std::vector<float> w, std::vector<float> b)
      : in_channels(in), out_channels(out), kernel_size(k), dilation(d), stride(s),
        weights(std::move(w)), bias(std::move(b)) {
    validate();
  }

  void validate() const {
    if (in_channels == 0 || out_channels == 0 || kernel_size == 0 || dilation == 0 || stride == 0)
      throw ConfigError("Conv1dLayer: all dimensions must be positive");
    if (weights.size() != out_channels * in_channels * kernel_size)
      throw ConfigError("Conv1dLayer: weight length " + std::to_string(weights.size()) +
                        " != out*in*k " + std::to_string(out_channels * in_channels * kernel_size));
    if (bias.size() != out_channels) throw ConfigError("Conv1dLayer: bias length != out_channels");
  }

  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

/// Transposed 1-D convolution with stride u, weights laid out in x out x k.
struct TransposedConv1dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  TransposedConv1dLayer() = default;
  TransposedConv1dLayer(std::size_t in, std::size_t out, std::size_t k, std::size_t u, std::size_t p)
      : in_channels(in), out_channels(out), kernel_size(k), stride(u), padding(p),
        weights(in * out * k, 0.0f), bias(out, 0.0f) {
    validate();
  }

  void validate() const {
    if (in_channels == 0 || out_channels == 0 || kernel_size == 0 || stride == 0)
      throw ConfigError("TransposedConv1dLayer: all dimensions must be positive");
    if (weights.size() != in_channels * out_channels * kernel_size)
      throw ConfigError("TransposedConv1dLayer: weight length != in*out*k");
    if (bias.size() != out_channels) throw ConfigError("TransposedConv1dLayer: bias length != out_channels");
    if (2 * padding > kernel_size) throw ConfigError("TransposedConv1dLayer: padding exceeds kernel/2");
  }

  std::size_t output_frames(std::size_t input_frames) const {
    if (input_frames == 0) return 0;
    return (input_frames - 1) * stride + kernel_size - 2 * padding;
  }

  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

inline FeatureMap conv1d(const Conv1dLayer& layer, const FeatureMap& input, PaddingMode mode) {
  if (input.channels() != layer.in_channels)
    throw ConfigError("conv1d: input has " + std::to_string(input.channels()) + " channels, layer expects " +
                      std::to_string(layer.in_channels));
  const std::size_t span = (layer.kernel_size - 1) * layer.dilation;
  std::size_t pad = 0;
  if (mode != PaddingMode::kNone) {
    if (span % 2 != 0)
      throw ConfigError("conv1d: same padding needs (k-1)*d even, got " + std::to_string(span));
    pad = span / 2;
  }

  const std::size_t in_ch = layer.in_channels;
  const std::size_t frames = input.frames();
  const std::size_t padded = frames + 2 * pad;
  if (padded < span + 1) return FeatureMap(layer.out_channels, 0);
  const std::size_t out_frames = (padded - span - 1) / layer.stride + 1;

  std::vector<float> xp;
  const float* src = input.data().data();
  std::size_t ld = frames;
  if (pad > 0) {
    xp.assign(in_ch * padded, 0.0f);
    for (std::size_t c = 0; c < in_ch; ++c) {
      auto row = input.row(c);
      float* dst = xp.data() + c * padded;
      if (mode == PaddingMode::kSameReflect) {
        auto r = reflect_pad(row, pad, pad);
        std::copy(r.begin(), r.end(), dst);
      } else {
        std::copy(row.begin(), row.end(), dst + pad);
      }
    }
    src = xp.data();
    ld = padded;
  }

  FeatureMap out(layer.out_channels, out_frames);
  Eigen::Map<detail::RowMat> y(out.data().data(), layer.out_channels, out_frames);
  for (std::size_t o = 0; o < layer.out_channels; ++o) y.row(o).setConstant(layer.bias[o]);

  const auto k = layer.kernel_size;
  for (std::size_t j = 0; j < k; ++j) {
    detail::ConstStridedMap w(layer.weights.data() + j, layer.out_channels, in_ch,
                              detail::DynStride(in_ch * k, k));
    detail::ConstStridedMap x(src + j * layer.dilation, in_ch, out_frames, detail::DynStride(ld, layer.stride));
    y.noalias() += w * x;
  }
  return out;
}

inline FeatureMap transposed_conv1d(const TransposedConv1dLayer& layer, const FeatureMap& input) {
  if (input.channels() != layer.in_channels)
    throw ConfigError("transposed_conv1d: input has " + std::to_string(input.channels()) +
                      " channels, layer expects " + std::to_string(layer.in_channels));
  const std::size_t frames = input.frames();
  const std::size_t out_ch = layer.out_channels;
  if (frames == 0) return FeatureMap(out_ch, 0);
  const std::size_t k = layer.kernel_size;
  const std::size_t u = layer.stride;
  const std::size_t full = (frames - 1) * u + k;

  // Scatter-add per tap into the uncropped output, then crop `padding` from each side.
  std::vector<float> yf(out_ch * full, 0.0f);
  Eigen::Map<const detail::RowMat> x(input.data().data(), layer.in_channels, frames);
  for (std::size_t j = 0; j < k; ++j) {
    detail::ConstStridedMap wt(layer.weights.data() + j, out_ch, layer.in_channels,
                               detail::DynStride(k, out_ch * k));
    detail::StridedMap y(yf.data() + j, out_ch, frames, detail::DynStride(full, u));
    y.noalias() += wt * x;
  }

  const std::size_t out_frames = layer.output_frames(frames);
  FeatureMap out(out_ch, out_frames);
  for (std::size_t o = 0; o < out_ch; ++o) {
    const float* s = yf.data() + o * full + layer.padding;
    float* d = out.row(o).data();
    for (std::size_t t = 0; t < out_frames; ++t) d[t] = s[t] + layer.bias[o];
  }
  return out;
}

inline FeatureMap leaky_relu(FeatureMap input, float slope) {
  if (slope < 0.0f) throw ConfigError("leaky_relu: slope must be non-negative");
  for (auto& v : input.data()) v = v >= 0.0f ? v : slope * v;
  return input;
}

/// tanh, then pulled strictly inside (-1, 1) so saturated float results never reach +-1.
inline FeatureMap tanh_clamp(FeatureMap input) {
  constexpr float kEdge = 1.0f - std::numeric_limits<float>::epsilon() / 2.0f;
  for (auto& v : input.data()) v = std::clamp(std::tanh(v), -kEdge, kEdge);
  return input;
}

}  // namespace bigvgan
