#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bigvgan/error.hpp"
#include "bigvgan/generator.hpp"
#include "bigvgan/io_bytes.hpp"
#include "bigvgan/mel.hpp"

namespace bigvgan {

inline constexpr char kCheckpointMagic[4] = {'B', 'V', 'G', 'W'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline nlohmann::json frontend_metadata(const MelConfig& m = {}) {
  return {{"sample_rate", m.sample_rate}, {"n_fft", m.n_fft},   {"win_length", m.win_length},
          {"hop", m.hop},                 {"n_mels", m.n_mels}, {"fmin", m.fmin},
          {"fmax", m.fmax},               {"log_clamp_floor", m.log_clamp_floor},
          {"mel_scale", "slaney"},        {"log", "natural"},   {"window", "hann"}};
}

/// Generator loaded from disk plus whatever the file said about its mel frontend.
struct Checkpoint {
  Generator generator;
  nlohmann::json frontend;
  std::vector<std::string> warnings;
};

/// Serialize a generator. Output bytes depend only on the config and the weights.
inline std::string encode_checkpoint(const Generator& gen, const MelConfig& frontend = {}) {
  nlohmann::json cfg = gen.config.to_json();
  cfg["frontend"] = frontend_metadata(frontend);
  const std::string text = cfg.dump();

  std::size_t count = 0;
  visit_parameters(gen, [&](const ParamView<const float>&) { ++count; });

  ByteWriter w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.str(text);
  w.u32(static_cast<std::uint32_t>(count));
  visit_parameters(gen, [&](const ParamView<const float>& p) {
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.str(p.name);
    w.u8(static_cast<std::uint8_t>(p.dims.size()));
    for (auto d : p.dims) w.u32(d);
    w.f32s(p.data);
  });
  return w.take();
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "checkpoint");
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  if (const auto v = r.u32(); v != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(v));
  const std::string text = r.str(r.u32());
  nlohmann::json cfg_json;
  try {
    cfg_json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: embedded config is not JSON: ") + e.what());
  }

  struct Stored {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
  };
  std::map<std::string, Stored> stored;
  std::vector<std::string> order;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str(r.u16());
    Stored s;
    const std::uint8_t ndim = r.u8();
    std::size_t elems = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      s.dims.push_back(r.u32());
      elems *= s.dims.back();
    }
    s.data = r.f32s(elems);
    if (stored.contains(name)) throw ValidationError("checkpoint: duplicate tensor " + name);
    order.push_back(name);
    stored.emplace(std::move(name), std::move(s));
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes after tensor data");

  GeneratorConfig cfg;
  try {
    cfg = GeneratorConfig::from_json(cfg_json);
  } catch (const ConfigError& e) {
    throw ValidationError(e.what());
  }

  // Check the whole manifest against the config before any weights are copied.
  Generator gen = build_skeleton(cfg);
  std::size_t matched = 0;
  visit_parameters(std::as_const(gen), [&](const ParamView<const float>& p) {
    const auto it = stored.find(p.name);
    if (it == stored.end()) throw ValidationError("checkpoint: missing tensor " + p.name);
    if (it->second.dims != p.dims) {
      std::string got, want;
      for (auto d : it->second.dims) got += (got.empty() ? "" : "x") + std::to_string(d);
      for (auto d : p.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
      throw ValidationError("checkpoint: tensor " + p.name + " has shape " + got + ", config expects " + want);
    }
    ++matched;
  });
  if (matched != stored.size()) {
    std::map<std::string, bool> expected;
    visit_parameters(std::as_const(gen), [&](const ParamView<const float>& p) { expected[p.name] = true; });
    for (const auto& name : order)
      if (!expected.contains(name)) throw ValidationError("checkpoint: unexpected tensor " + name);
  }
  visit_parameters(gen, [&](ParamView<float> p) {
    auto& src = stored.at(p.name).data;
    std::copy(src.begin(), src.end(), p.data.begin());
    std::vector<float>().swap(src);
  });

  Checkpoint ck{std::move(gen), cfg_json.value("frontend", nlohmann::json::object()), {}};
  const auto expected_frontend = frontend_metadata();
  if (ck.frontend.empty()) {
    ck.warnings.push_back("checkpoint carries no frontend metadata");
  } else {
    for (const auto& [key, value] : expected_frontend.items())
      if (!ck.frontend.contains(key) || ck.frontend.at(key) != value)
        ck.warnings.push_back("frontend field '" + key + "' differs from this engine's mel frontend");
  }
  return ck;
}

inline void save_checkpoint(const Generator& gen, const std::string& path) { write_file(path, encode_checkpoint(gen)); }

inline Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

}  // namespace bigvgan
