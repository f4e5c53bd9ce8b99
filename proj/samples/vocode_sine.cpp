// Copy-synthesis of a short chirp with a randomly initialised bigvgan-base.
// Random weights produce noise, not speech; the point is the plumbing.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "bigvgan.hpp"

int main(int argc, char** argv) {
  using namespace bigvgan;
  const char* out = argc > 1 ? argv[1] : "chirp_resynth.wav";

  AudioBuffer audio(24000, std::vector<float>(24000));
  for (std::size_t i = 0; i < audio.size(); ++i) {
    const double t = static_cast<double>(i) / audio.sample_rate;
    audio.samples[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * (200.0 * t + 400.0 * t * t)));
  }

  const MelSpectrogram mel = mel_spectrogram(audio);
  const Generator gen = build_generator(GeneratorConfig::named("bigvgan-base"), 1234);
  const AudioBuffer y = generate(gen, mel);
  write_wav(out, y);

  const MetricReport r = evaluate_metrics(audio, y);
  std::printf("mel %zux%zu -> %zu samples, %zu params\n", mel.bands(), mel.frames(), y.size(), count_parameters(gen));
  std::printf("%s\n", r.to_json().dump().c_str());
}
