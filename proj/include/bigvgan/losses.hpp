#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "bigvgan/discriminators.hpp"
#include "bigvgan/error.hpp"
#include "bigvgan/mel.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

inline constexpr std::size_t kSubDiscriminators = 8;

struct LossWeights {
  double lambda_fm = 2.0;
  double lambda_mel = 45.0;
};

/// Least-squares generator term: mean((D(G(s)) - 1)^2).
inline double adv_loss_g(const Map2d& fake_scores) {
  if (fake_scores.size() == 0) throw ConfigError("adv_loss_g: empty score map");
  double acc = 0.0;
  for (float v : fake_scores.data()) acc += (static_cast<double>(v) - 1.0) * (static_cast<double>(v) - 1.0);
  return acc / static_cast<double>(fake_scores.size());
}

/// Least-squares discriminator term: mean((D(x) - 1)^2) + mean(D(G(s))^2).
inline double adv_loss_d(const Map2d& real_scores, const Map2d& fake_scores) {
  if (real_scores.size() == 0 || fake_scores.size() == 0) throw ConfigError("adv_loss_d: empty score map");
  double real = 0.0, fake = 0.0;
  for (float v : real_scores.data()) real += (static_cast<double>(v) - 1.0) * (static_cast<double>(v) - 1.0);
  for (float v : fake_scores.data()) fake += static_cast<double>(v) * v;
  return real / static_cast<double>(real_scores.size()) + fake / static_cast<double>(fake_scores.size());
}

/// Sum over layers of the per-layer mean absolute difference.
inline double feature_matching_loss(const std::vector<Map2d>& real, const std::vector<Map2d>& fake) {
  if (real.size() != fake.size())
    throw ConfigError("feature_matching_loss: " + std::to_string(real.size()) + " real layers vs " +
                      std::to_string(fake.size()) + " fake layers");
  double total = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    if (!real[i].same_shape(fake[i]))
      throw ConfigError("feature_matching_loss: shape mismatch at layer " + std::to_string(i));
    if (real[i].size() == 0) throw ConfigError("feature_matching_loss: empty layer " + std::to_string(i));
    double acc = 0.0;
    const auto& r = real[i].data();
    const auto& f = fake[i].data();
    for (std::size_t k = 0; k < r.size(); ++k) acc += std::abs(static_cast<double>(r[k]) - f[k]);
    total += acc / static_cast<double>(r.size());
  }
  return total;
}

/// Mean absolute log-mel difference.
inline double mel_loss(const AudioBuffer& x, const AudioBuffer& x_hat, const MelConfig& cfg = {}) {
  if (x.size() != x_hat.size())
    throw ConfigError("mel_loss: length mismatch " + std::to_string(x.size()) + " vs " + std::to_string(x_hat.size()));
  if (x.sample_rate != x_hat.sample_rate) throw ConfigError("mel_loss: sample rate mismatch");
  const MelFrontend frontend(cfg);
  const auto a = frontend(x);
  const auto b = frontend(x_hat);
  double acc = 0.0;
  const auto& ad = a.values.data();
  const auto& bd = b.values.data();
  for (std::size_t i = 0; i < ad.size(); ++i) acc += std::abs(static_cast<double>(ad[i]) - bd[i]);
  return ad.empty() ? 0.0 : acc / static_cast<double>(ad.size());
}

struct SubLoss {
  double adv_g = 0.0;
  double adv_d = 0.0;
  double fm = 0.0;
};

struct LossReport {
  std::vector<SubLoss> per_sub;
  double adv_g = 0.0;  ///< sum over sub-discriminators
  double adv_d = 0.0;
  double fm = 0.0;     ///< unweighted sum over sub-discriminators
  double mel = 0.0;
  double L_G = 0.0;
  double L_D = 0.0;
  LossWeights weights;

  nlohmann::json to_json() const {
    nlohmann::json adv_g_arr = nlohmann::json::array(), adv_d_arr = nlohmann::json::array(),
                   fm_arr = nlohmann::json::array();
    for (const auto& s : per_sub) {
      adv_g_arr.push_back(s.adv_g);
      adv_d_arr.push_back(s.adv_d);
      fm_arr.push_back(s.fm);
    }
    return {{"adv_g", adv_g},
            {"adv_d", adv_d},
            {"fm", fm},
            {"mel", mel},
            {"L_G", L_G},
            {"L_D", L_D},
            {"lambda_fm", weights.lambda_fm},
            {"lambda_mel", weights.lambda_mel},
            {"grad_norm", nullptr},
            {"per_sub", {{"adv_g", adv_g_arr}, {"adv_d", adv_d_arr}, {"fm", fm_arr}}}};
  }
};

/// Weighted generator/discriminator objectives from any number of paired sub-discriminator outputs.
inline LossReport weighted_losses(const std::vector<DiscriminatorOutput>& real,
                                  const std::vector<DiscriminatorOutput>& fake, double mel, const LossWeights& w) {
  if (real.size() != fake.size())
    throw ConfigError("losses: " + std::to_string(real.size()) + " real vs " + std::to_string(fake.size()) +
                      " fake sub-discriminator outputs");
  if (w.lambda_fm < 0.0 || w.lambda_mel < 0.0) throw ConfigError("losses: weights must be non-negative");
  LossReport r;
  r.weights = w;
  r.mel = mel;
  for (std::size_t k = 0; k < real.size(); ++k) {
    SubLoss s;
    s.adv_g = adv_loss_g(fake[k].score);
    s.adv_d = adv_loss_d(real[k].score, fake[k].score);
    s.fm = feature_matching_loss(real[k].features, fake[k].features);
    r.adv_g += s.adv_g;
    r.adv_d += s.adv_d;
    r.fm += s.fm;
    r.per_sub.push_back(s);
  }
  r.L_G = r.adv_g + w.lambda_fm * r.fm + w.lambda_mel * r.mel;
  r.L_D = r.adv_d;
  return r;
}

/// Full objective over the 5 MPD + 3 MRD sub-discriminators.
inline LossReport composite_losses(const AudioBuffer& generated, const AudioBuffer& real_audio,
                                   const std::vector<DiscriminatorOutput>& real_out,
                                   const std::vector<DiscriminatorOutput>& fake_out, const LossWeights& w = {},
                                   const MelConfig& mel_cfg = {}) {
  if (real_out.size() != kSubDiscriminators || fake_out.size() != kSubDiscriminators)
    throw ConfigError("composite_losses: expected " + std::to_string(kSubDiscriminators) +
                      " sub-discriminator outputs, got " + std::to_string(real_out.size()) + "/" +
                      std::to_string(fake_out.size()));
  return weighted_losses(real_out, fake_out, mel_loss(real_audio, generated, mel_cfg), w);
}

}  // namespace bigvgan
