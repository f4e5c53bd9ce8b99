// bigvgan: command-line front end for the inference engine and its analysis tools.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bigvgan.hpp"

namespace {

using namespace bigvgan;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kFormat = 3, kConfig = 4 };

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool pcm16 = false;
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

AudioBuffer read_input_wav(const std::string& path) {
  AudioBuffer a = read_wav(path);
  if (a.sample_rate != 24000)
    throw InputError(path + ": sample rate " + std::to_string(a.sample_rate) +
                     " Hz is not supported, resample to 24000 Hz first");
  return a;
}

void write_output_wav(const Globals& g, const std::string& path, const AudioBuffer& a) {
  write_wav(path, a, g.pcm16 ? WavEncoding::kPcm16 : WavEncoding::kFloat32);
}

Generator load_generator(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  for (const auto& w : ck.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(ck.generator);
}

GeneratorConfig resolve_config(const Globals& g, const std::string& variant) {
  if (!g.config.empty()) {
    std::ifstream in(g.config);
    if (!in) throw InputError("cannot open config " + g.config);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(g.config + ": " + e.what());
    }
    return GeneratorConfig::from_json(j);
  }
  GeneratorConfig c = GeneratorConfig::named(variant);
  c.validate();
  return c;
}

void write_text(const std::string& path, const std::string& text) { write_file(path, text); }

std::string response_path(const std::string& out) {
  const auto dot = out.rfind('.');
  const auto slash = out.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".response.csv";
  return out.substr(0, dot) + ".response" + out.substr(dot);
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', '\t');
    std::istringstream fields(line);
    std::string ref, deg, extra;
    if (!(fields >> ref >> deg) || (fields >> extra))
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected two columns (ref, deg)");
    pairs.emplace_back(ref, deg);
  }
  return pairs;
}

json metrics_for(const std::string& ref, const std::string& deg) {
  json j = evaluate_metrics(read_input_wav(ref), read_input_wav(deg)).to_json();
  return j;
}

json run_manifest(const std::vector<std::pair<std::string, std::string>>& pairs, unsigned threads) {
  std::vector<json> results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < pairs.size();) {
      try {
        results[i] = metrics_for(pairs[i].first, pairs[i].second);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pairs.size())));
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  json out = json::array();
  json mean = MetricReport{0, 0, 0, 0, 0}.to_json();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    json row = {{"ref", pairs[i].first}, {"deg", pairs[i].second}, {"metrics", results[i]}};
    for (auto& [k, v] : mean.items()) v = v.get<double>() + results[i][k].get<double>();
    out.push_back(std::move(row));
  }
  if (!pairs.empty())
    for (auto& [k, v] : mean.items()) v = v.get<double>() / static_cast<double>(pairs.size());
  return {{"pairs", out}, {"count", pairs.size()}, {"mean", mean}};
}

int run(int argc, char** argv) {
  CLI::App app{"BigVGAN inference engine and DSP toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Generator config JSON (overrides the variant name)");
  app.add_option("--seed", g.seed, "Random seed for weight initialisation");
  app.add_option("--threads", g.threads, "Worker threads for batch metrics")->check(CLI::Range(1u, 1024u));
  app.add_flag("--pcm16", g.pcm16, "Write 16-bit PCM (dithered) instead of float32");
  app.fallthrough();

  std::string in, out, ckpt, ref, deg, manifest, variant = "bigvgan-base";

  auto* mel = app.add_subcommand("mel", "Extract a log-mel spectrogram (.bvgm) from a 24 kHz WAV");
  mel->add_option("in", in)->required();
  mel->add_option("out", out)->required();

  auto* vocode = app.add_subcommand("vocode", "Synthesize a WAV from a .bvgm mel file");
  vocode->add_option("checkpoint", ckpt)->required();
  vocode->add_option("in", in)->required();
  vocode->add_option("out", out)->required();

  auto* copysyn = app.add_subcommand("copysyn", "Mel analysis followed by resynthesis");
  copysyn->add_option("checkpoint", ckpt)->required();
  copysyn->add_option("in", in)->required();
  copysyn->add_option("out", out)->required();

  auto* metrics = app.add_subcommand("metrics", "Objective metrics for a ref/deg pair or a manifest");
  metrics->add_option("ref", ref);
  metrics->add_option("deg", deg);
  metrics->add_option("--manifest", manifest, "Two-column file of ref/deg paths");

  double seconds = 10.0;
  std::size_t runs = 3;
  auto* bench = app.add_subcommand("bench", "Measure synthesis speed");
  bench->add_option("checkpoint", ckpt, "Checkpoint to time (omit to use random weights)");
  bench->add_option("--variant", variant, "Variant to build with random weights when no checkpoint is given");
  bench->add_option("--seconds", seconds, "Audio duration per run")->check(CLI::PositiveNumber);
  bench->add_option("--runs", runs, "Measured runs (median reported)")->check(CLI::Range(std::size_t{3}, std::size_t{1000}));

  std::size_t n_fft = 1024, hop = 256;
  auto* spec = app.add_subcommand("spec-dump", "Write the STFT magnitude as a bins x frames CSV");
  spec->add_option("in", in)->required();
  spec->add_option("out", out)->required();
  spec->add_option("--n-fft", n_fft)->check(CLI::PositiveNumber);
  spec->add_option("--hop", hop)->check(CLI::PositiveNumber);

  int ratio = 2;
  std::size_t response_bins = 4096;
  auto* filter = app.add_subcommand("filter", "Dump the anti-aliasing filter taps and magnitude response");
  filter->add_option("m", ratio, "Resampling ratio")->required();
  filter->add_option("out", out, "Taps CSV; the response goes next to it as *.response.csv")->required();
  filter->add_option("--bins", response_bins, "DFT size for the response")->check(CLI::Range(16, 1 << 20));

  auto* init = app.add_subcommand("init-random", "Write a randomly initialised checkpoint");
  init->add_option("variant", variant)->required();
  init->add_option("out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  if (mel->parsed()) {
    write_mel(out, mel_spectrogram(read_input_wav(in)));
  } else if (vocode->parsed()) {
    const Generator gen = load_generator(ckpt);
    write_output_wav(g, out, generate(gen, read_mel(in)));
  } else if (copysyn->parsed()) {
    const Generator gen = load_generator(ckpt);
    write_output_wav(g, out, generate(gen, mel_spectrogram(read_input_wav(in))));
  } else if (metrics->parsed()) {
    if (!manifest.empty()) {
      if (!ref.empty()) throw ConfigError("metrics: give either a ref/deg pair or --manifest, not both");
      print_json(run_manifest(read_manifest(manifest), g.threads));
    } else {
      if (ref.empty() || deg.empty()) throw ConfigError("metrics: need ref.wav and deg.wav, or --manifest");
      print_json(metrics_for(ref, deg));
    }
  } else if (bench->parsed()) {
    const Generator gen = ckpt.empty() ? build_generator(resolve_config(g, variant), g.seed) : load_generator(ckpt);
    print_json(run_bench(gen, seconds, runs).to_json());
  } else if (spec->parsed()) {
    const FeatureMap mag = stft_magnitude(read_input_wav(in), StftParams{n_fft, hop, n_fft, StftPadding::kReflect});
    std::string text;
    char buf[32];
    for (std::size_t b = 0; b < mag.channels(); ++b) {
      for (std::size_t t = 0; t < mag.frames(); ++t) {
        std::snprintf(buf, sizeof buf, t ? ",%.9g" : "%.9g", mag(b, t));
        text += buf;
      }
      text += '\n';
    }
    write_text(out, text);
    print_json({{"bins", mag.channels()}, {"frames", mag.frames()}, {"out", out}});
  } else if (filter->parsed()) {
    const LowPassFilter f = design_kaiser_lowpass(ratio);
    std::string taps = "index,tap\n";
    char buf[64];
    for (std::size_t i = 0; i < f.taps.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i, f.taps[i]);
      taps += buf;
    }
    write_text(out, taps);
    const auto mag = magnitude_response(f.taps, response_bins);
    std::string resp = "freq_normalized,mag_db\n";
    for (std::size_t k = 0; k < mag.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", static_cast<double>(k) / static_cast<double>(response_bins),
                    20.0 * std::log10(std::max(mag[k], 1e-12)));
      resp += buf;
    }
    write_text(response_path(out), resp);
    print_json({{"ratio", f.ratio},
                {"num_taps", f.num_taps},
                {"cutoff", f.cutoff},
                {"half_width", f.half_width},
                {"attenuation_db", f.attenuation_db},
                {"beta", f.beta},
                {"taps", out},
                {"response", response_path(out)}});
  } else if (init->parsed()) {
    const Generator gen = build_generator(resolve_config(g, variant), g.seed);
    save_checkpoint(gen, out);
    print_json({{"variant", gen.config.variant}, {"params", count_parameters(gen)}, {"seed", g.seed}, {"out", out}});
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bigvgan::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const bigvgan::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const bigvgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const bigvgan::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
