#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "bigvgan/antialias.hpp"
#include "bigvgan/conv.hpp"
#include "bigvgan/error.hpp"
#include "bigvgan/mel.hpp"
#include "bigvgan/snake.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

enum class Activation { kSnake, kLeakyRelu };

inline constexpr float kLeakySlope = 0.1f;
inline constexpr std::size_t kHopContract = 256;

inline std::string to_string(Activation a) { return a == Activation::kSnake ? "snake" : "leaky_relu"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "snake") return Activation::kSnake;
  if (s == "leaky_relu") return Activation::kLeakyRelu;
  throw ConfigError("unknown activation '" + s + "' (expected snake or leaky_relu)");
}

/// (conv_a dilation, conv_b dilation) of one AMP unit.
struct DilationPair {
  std::size_t first = 1;
  std::size_t second = 1;
  bool operator==(const DilationPair&) const = default;
};

/// Declarative generator architecture. JSON field names are part of the checkpoint format.
struct GeneratorConfig {
  std::string variant = "custom";
  std::size_t h = 512;
  std::vector<std::size_t> upsample_rates;
  std::vector<std::size_t> kernels;
  /// One list of unit dilation pairs per AMP block (same length as `kernels`).
  std::vector<std::vector<DilationPair>> dilations;
  bool use_filter = true;
  Activation activation = Activation::kSnake;
  std::size_t n_mels = 100;
  int sample_rate = 24000;

  bool operator==(const GeneratorConfig&) const = default;

  static std::vector<std::vector<DilationPair>> default_dilations(std::size_t blocks) {
    return std::vector<std::vector<DilationPair>>(blocks, {{1, 1}, {3, 1}, {5, 1}});
  }

  /// Named variants; "-nofilter" and "-leaky" suffixes select the ablations.
  static GeneratorConfig named(const std::string& name) {
    GeneratorConfig c;
    std::string base = name;
    auto strip = [&](const std::string& suffix) {
      if (base.size() > suffix.size() && base.ends_with(suffix)) {
        base.resize(base.size() - suffix.size());
        return true;
      }
      return false;
    };
    if (strip("-leaky")) {
      c.use_filter = false;
      c.activation = Activation::kLeakyRelu;
    } else if (strip("-nofilter")) {
      c.use_filter = false;
    }
    if (base == "bigvgan-base") {
      c.h = 512;
      c.upsample_rates = {8, 8, 2, 2};
    } else if (base == "bigvgan") {
      c.h = 1536;
      c.upsample_rates = {4, 4, 2, 2, 2, 2};
    } else {
      throw ConfigError("unknown generator variant '" + name + "'");
    }
    c.variant = name;
    c.kernels = {3, 7, 11};
    c.dilations = default_dilations(3);
    return c;
  }

  std::size_t stage_channels(std::size_t stage) const { return h >> (stage + 1); }
  std::size_t final_channels() const { return stage_channels(upsample_rates.size() - 1); }

  void validate() const {
    if (n_mels == 0) throw ConfigError("generator config: n_mels must be positive");
    if (sample_rate <= 0) throw ConfigError("generator config: sample_rate must be positive");
    if (upsample_rates.empty()) throw ConfigError("generator config: upsample_rates is empty");
    std::size_t product = 1;
    for (auto u : upsample_rates) {
      if (u < 2 || u % 2 != 0)
        throw ConfigError("generator config: upsample rate " + std::to_string(u) + " must be even and >= 2");
      product *= u;
    }
    if (product != kHopContract)
      throw ConfigError("generator config: product of upsample_rates is " + std::to_string(product) + ", must be " +
                        std::to_string(kHopContract));
    if (upsample_rates.size() >= 63 || h % (std::size_t{1} << upsample_rates.size()) != 0 || h == 0)
      throw ConfigError("generator config: h=" + std::to_string(h) + " cannot be halved " +
                        std::to_string(upsample_rates.size()) + " times");
    if (kernels.empty()) throw ConfigError("generator config: kernels is empty");
    if (dilations.size() != kernels.size())
      throw ConfigError("generator config: need one dilation list per kernel (" + std::to_string(kernels.size()) +
                        "), got " + std::to_string(dilations.size()));
    for (std::size_t j = 0; j < kernels.size(); ++j) {
      if (kernels[j] == 0) throw ConfigError("generator config: kernel size must be positive");
      if (dilations[j].empty()) throw ConfigError("generator config: AMP block has no units");
      for (const auto& d : dilations[j]) {
        for (auto dd : {d.first, d.second}) {
          if (dd == 0) throw ConfigError("generator config: dilation must be positive");
          if ((kernels[j] - 1) * dd % 2 != 0)
            throw ConfigError("generator config: (k-1)*d odd for k=" + std::to_string(kernels[j]) +
                              ", d=" + std::to_string(dd));
        }
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json dil = nlohmann::json::array();
    for (const auto& block : dilations) {
      nlohmann::json b = nlohmann::json::array();
      for (const auto& p : block) b.push_back({p.first, p.second});
      dil.push_back(b);
    }
    return {{"variant", variant},       {"h", h},
            {"upsample_rates", upsample_rates}, {"kernels", kernels},
            {"dilations", dil},         {"use_filter", use_filter},
            {"activation", to_string(activation)}, {"n_mels", n_mels},
            {"sample_rate", sample_rate}};
  }

  static GeneratorConfig from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    try {
      c.variant = j.at("variant").get<std::string>();
      c.h = j.at("h").get<std::size_t>();
      c.upsample_rates = j.at("upsample_rates").get<std::vector<std::size_t>>();
      c.kernels = j.at("kernels").get<std::vector<std::size_t>>();
      c.dilations.clear();
      for (const auto& block : j.at("dilations")) {
        std::vector<DilationPair> units;
        for (const auto& p : block) {
          if (!p.is_array() || p.size() != 2) throw ConfigError("generator config: dilation entries must be pairs");
          units.push_back({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
        }
        c.dilations.push_back(std::move(units));
      }
      c.use_filter = j.at("use_filter").get<bool>();
      c.activation = activation_from_string(j.at("activation").get<std::string>());
      c.n_mels = j.at("n_mels").get<std::size_t>();
      c.sample_rate = j.at("sample_rate").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("generator config: ") + e.what());
    }
    c.validate();
    return c;
  }
};

struct AmpUnit {
  SnakeParams act_a;
  Conv1dLayer conv_a;
  SnakeParams act_b;
  Conv1dLayer conv_b;
};

struct AmpBlock {
  std::size_t kernel = 0;
  std::vector<AmpUnit> units;
};

struct GeneratorStage {
  TransposedConv1dLayer up;
  std::vector<AmpBlock> blocks;
};

/// Instantiated generator. Treat as immutable once built; generate() is a pure function of it.
struct Generator {
  GeneratorConfig config;
  Conv1dLayer pre;
  std::vector<GeneratorStage> stages;
  SnakeParams post_act;
  Conv1dLayer post_conv;
  LowPassFilter filter;
};

enum class ParamKind { kWeight, kBias, kAlpha };

/// One named tensor of a generator, as seen by init, counting and checkpoint code.
template <typename T>
struct ParamView {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::span<T> data;
  ParamKind kind;
  std::size_t fan_in;
};

/// Visit every parameter tensor in canonical order. Works on const and mutable generators.
template <typename G, typename F>
  requires std::is_same_v<std::remove_const_t<G>, Generator>
void visit_parameters(G& gen, F&& fn) {
  using T = std::conditional_t<std::is_const_v<G>, const float, float>;
  auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
  auto conv = [&](const std::string& prefix, auto& layer, const std::string& wname, const std::string& bname) {
    fn(ParamView<T>{prefix + wname, {u32(layer.out_channels), u32(layer.in_channels), u32(layer.kernel_size)},
                    std::span<T>(layer.weights), ParamKind::kWeight, layer.in_channels * layer.kernel_size});
    fn(ParamView<T>{prefix + bname, {u32(layer.out_channels)}, std::span<T>(layer.bias), ParamKind::kBias,
                    layer.in_channels * layer.kernel_size});
  };
  auto alpha = [&](const std::string& name, auto& params) {
    if (gen.config.activation != Activation::kSnake) return;
    fn(ParamView<T>{name, {u32(params.alpha.size())}, std::span<T>(params.alpha), ParamKind::kAlpha, 0});
  };

  conv("pre.", gen.pre, "w", "b");
  for (std::size_t i = 0; i < gen.stages.size(); ++i) {
    auto& st = gen.stages[i];
    const std::string sp = "stage" + std::to_string(i) + ".";
    fn(ParamView<T>{sp + "up.w", {u32(st.up.in_channels), u32(st.up.out_channels), u32(st.up.kernel_size)},
                    std::span<T>(st.up.weights), ParamKind::kWeight, st.up.in_channels * st.up.kernel_size});
    fn(ParamView<T>{sp + "up.b", {u32(st.up.out_channels)}, std::span<T>(st.up.bias), ParamKind::kBias,
                    st.up.in_channels * st.up.kernel_size});
    for (std::size_t j = 0; j < st.blocks.size(); ++j) {
      auto& block = st.blocks[j];
      for (std::size_t l = 0; l < block.units.size(); ++l) {
        auto& unit = block.units[l];
        const std::string up = sp + "amp" + std::to_string(j) + ".unit" + std::to_string(l) + ".";
        alpha(up + "acta.alpha", unit.act_a);
        conv(up, unit.conv_a, "conva.w", "conva.b");
        alpha(up + "actb.alpha", unit.act_b);
        conv(up, unit.conv_b, "convb.w", "convb.b");
      }
    }
  }
  alpha("post.act.alpha", gen.post_act);
  conv("post.", gen.post_conv, "conv.w", "conv.b");
}

/// Allocate every layer of `cfg` with zero weights and alpha = 1.
inline Generator build_skeleton(const GeneratorConfig& cfg) {
  cfg.validate();
  Generator g;
  g.config = cfg;
  g.filter = design_kaiser_lowpass(2);
  g.pre = Conv1dLayer(cfg.n_mels, cfg.h, 7);
  std::size_t channels = cfg.h;
  for (std::size_t i = 0; i < cfg.upsample_rates.size(); ++i) {
    const std::size_t u = cfg.upsample_rates[i];
    const std::size_t out = channels / 2;
    GeneratorStage st;
    st.up = TransposedConv1dLayer(channels, out, 2 * u, u, u / 2);
    for (std::size_t j = 0; j < cfg.kernels.size(); ++j) {
      AmpBlock block;
      block.kernel = cfg.kernels[j];
      for (const auto& d : cfg.dilations[j]) {
        AmpUnit unit;
        if (cfg.activation == Activation::kSnake) {
          unit.act_a = SnakeParams::ones(out);
          unit.act_b = SnakeParams::ones(out);
        }
        unit.conv_a = Conv1dLayer(out, out, block.kernel, d.first);
        unit.conv_b = Conv1dLayer(out, out, block.kernel, d.second);
        block.units.push_back(std::move(unit));
      }
      st.blocks.push_back(std::move(block));
    }
    g.stages.push_back(std::move(st));
    channels = out;
  }
  if (cfg.activation == Activation::kSnake) g.post_act = SnakeParams::ones(channels);
  g.post_conv = Conv1dLayer(channels, 1, 7);
  return g;
}

/// Random weights: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, alpha = 1.
inline Generator build_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
  Generator g = build_skeleton(cfg);
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed ^ (seed >> 32)));
  visit_parameters(g, [&](ParamView<float> p) {
    if (p.kind == ParamKind::kAlpha) return;
    const float bound = 1.0f / std::sqrt(static_cast<float>(p.fan_in));
    for (auto& v : p.data) {
      const float unit = static_cast<float>(rng() >> 8) * 0x1p-24f;
      v = (2.0f * unit - 1.0f) * bound;
    }
  });
  return g;
}

inline std::size_t count_parameters(const Generator& g) {
  std::size_t n = 0;
  visit_parameters(g, [&](const ParamView<const float>& p) { n += p.data.size(); });
  return n;
}

namespace detail {

inline FeatureMap apply_activation(const Generator& g, const FeatureMap& x, const SnakeParams& params) {
  if (g.config.activation == Activation::kLeakyRelu) return leaky_relu(x, kLeakySlope);
  if (g.config.use_filter) return filtered_snake(x, params, g.filter);
  return snake(x, params);
}

inline FeatureMap amp_forward(const Generator& g, const AmpBlock& block, FeatureMap x) {
  for (const auto& unit : block.units) {
    FeatureMap t = apply_activation(g, x, unit.act_a);
    t = conv1d(unit.conv_a, t, PaddingMode::kSameReflect);
    t = apply_activation(g, t, unit.act_b);
    t = conv1d(unit.conv_b, t, PaddingMode::kSameReflect);
    auto& xd = x.data();
    const auto& td = t.data();
    for (std::size_t i = 0; i < xd.size(); ++i) xd[i] += td[i];
  }
  return x;
}

}  // namespace detail

/// Mel (bands x frames) to waveform of exactly 256 * frames samples.
inline AudioBuffer generate(const Generator& g, const FeatureMap& mel) {
  if (mel.channels() != g.config.n_mels)
    throw ConfigError("generate: mel has " + std::to_string(mel.channels()) + " bands, generator expects " +
                      std::to_string(g.config.n_mels));
  FeatureMap x = conv1d(g.pre, mel, PaddingMode::kSameZero);
  for (const auto& st : g.stages) {
    x = transposed_conv1d(st.up, x);
    FeatureMap acc(x.channels(), x.frames());
    for (const auto& block : st.blocks) {
      const FeatureMap y = detail::amp_forward(g, block, x);
      auto& ad = acc.data();
      const auto& yd = y.data();
      for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += yd[i];
    }
    const float inv = 1.0f / static_cast<float>(st.blocks.size());
    for (auto& v : acc.data()) v *= inv;
    x = std::move(acc);
  }
  x = detail::apply_activation(g, x, g.post_act);
  x = conv1d(g.post_conv, x, PaddingMode::kSameZero);
  x = tanh_clamp(std::move(x));
  return AudioBuffer(g.config.sample_rate, std::move(x.data()));
}

inline AudioBuffer generate(const Generator& g, const MelSpectrogram& mel) { return generate(g, mel.values); }

}  // namespace bigvgan
