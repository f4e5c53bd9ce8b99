// Print the 2x anti-aliasing filter and how much a swept sine aliases
// through Snake with and without it.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "bigvgan.hpp"

int main() {
  using namespace bigvgan;
  const LowPassFilter f = design_kaiser_lowpass(2);
  std::printf("taps=%zu beta=%.5f A=%.3f dB cutoff=%.3f half_width=%.3f\n", f.taps.size(), f.beta, f.attenuation_db,
              f.cutoff, f.half_width);
  for (std::size_t i = 0; i < f.taps.size(); ++i) std::printf("  h[%2zu] = % .8f\n", i, f.taps[i]);

  const auto mag = magnitude_response(f.taps, 64);
  std::printf("\nfreq  |H| dB\n");
  for (std::size_t k = 0; k < mag.size(); k += 4)
    std::printf("%.4f %8.2f\n", k / 64.0, 20.0 * std::log10(std::max(mag[k], 1e-12)));

  // A tone near Nyquist through Snake: the plain version folds harmonics back into the band.
  const std::size_t n = 4096;
  FeatureMap x(1, n);
  for (std::size_t i = 0; i < n; ++i) x(0, i) = static_cast<float>(std::sin(2.0 * std::numbers::pi * 0.2 * i));
  const FeatureMap plain = snake(x, SnakeParams::ones(1));
  const FeatureMap filtered = filtered_snake(x, SnakeParams::ones(1), f);
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) diff += std::abs(plain(0, i) - filtered(0, i));
  std::printf("\nmean |snake - filtered_snake| at 0.4 Nyquist: %.5f\n", diff / n);
}
