#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "json.hpp"

#include "bigvgan/error.hpp"
#include "bigvgan/generator.hpp"

namespace bigvgan {

struct BenchResult {
  std::string variant;
  std::size_t parameters = 0;
  std::size_t samples = 0;
  int sample_rate = 0;
  std::size_t warmup_runs = 0;
  std::size_t measured_runs = 0;
  double seconds = 0.0;  ///< median wall-clock seconds per measured run
  double rtf = 0.0;      ///< generated audio seconds per wall-clock second

  nlohmann::json to_json() const {
    return {{"variant", variant},
            {"params", parameters},
            {"params_m", std::round(static_cast<double>(parameters) / 1e4) / 100.0},
            {"samples", samples},
            {"sample_rate", sample_rate},
            {"audio_seconds", static_cast<double>(samples) / sample_rate},
            {"warmup_runs", warmup_runs},
            {"measured_runs", measured_runs},
            {"seconds_median", seconds},
            {"rtf", rtf}};
  }
};

/// Deterministic synthetic log-mel input covering `seconds` of output audio.
inline FeatureMap synthetic_mel(const GeneratorConfig& cfg, double seconds, std::uint32_t seed = 7) {
  const auto frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(seconds * cfg.sample_rate / static_cast<double>(kHopContract))));
  FeatureMap mel(cfg.n_mels, frames);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-9.0f, 1.0f);
  for (auto& v : mel.data()) v = u(rng);
  return mel;
}

/// Time generate() on synthetic input: `warmup` unmeasured runs, then the median of `runs`.
inline BenchResult run_bench(const Generator& gen, double seconds, std::size_t runs, std::size_t warmup = 2) {
  if (runs < 3) throw ConfigError("bench: need at least 3 measured runs");
  if (!(seconds > 0.0)) throw ConfigError("bench: duration must be positive");
  const FeatureMap mel = synthetic_mel(gen.config, seconds);
  BenchResult r;
  r.variant = gen.config.variant;
  r.parameters = count_parameters(gen);
  r.sample_rate = gen.config.sample_rate;
  r.warmup_runs = warmup;
  r.measured_runs = runs;
  for (std::size_t i = 0; i < warmup; ++i) r.samples = generate(gen, mel).size();
  std::vector<double> times;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    r.samples = generate(gen, mel).size();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  r.seconds = times[times.size() / 2];
  r.rtf = (static_cast<double>(r.samples) / r.sample_rate) / r.seconds;
  return r;
}

}  // namespace bigvgan
