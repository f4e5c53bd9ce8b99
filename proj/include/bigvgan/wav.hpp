#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <string_view>

#include "bigvgan/error.hpp"
#include "bigvgan/io_bytes.hpp"
#include "bigvgan/tensor.hpp"

namespace bigvgan {

enum class WavEncoding { kFloat32, kPcm16 };

/// Decode a RIFF/WAVE file holding mono PCM16 or IEEE float32 samples.
inline AudioBuffer decode_wav(std::string_view bytes) {
  ByteReader r(bytes, "wav");
  char tag[4];
  r.raw(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw FormatError("wav: missing RIFF header");
  r.u32();
  r.raw(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw FormatError("wav: not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    r.raw(tag, 4);
    const std::uint32_t size = r.u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const std::string fmt = r.str(size);
      ByteReader f(fmt, "wav fmt chunk");
      format = f.u16();
      channels = f.u16();
      rate = f.u32();
      f.u32();
      f.u16();
      bits = f.u16();
      if (format == 0xFFFE) {
        if (fmt.size() < 26) throw FormatError("wav: truncated extensible fmt chunk");
        f.u16();
        f.u16();
        f.u32();
        format = f.u16();
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (channels != 1)
        throw InputError("wav: expected mono audio, got " + std::to_string(channels) + " channels");
      AudioBuffer out;
      out.sample_rate = static_cast<int>(rate);
      if (rate == 0) throw FormatError("wav: zero sample rate");
      if (format == 1 && bits == 16) {
        const std::size_t n = std::min<std::size_t>(size, r.remaining()) / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i)
          out.samples[i] = static_cast<float>(static_cast<std::int16_t>(r.u16())) / 32768.0f;
      } else if (format == 3 && bits == 32) {
        const std::size_t n = std::min<std::size_t>(size, r.remaining()) / 4;
        out.samples = r.f32s(n);
      } else {
        throw FormatError("wav: unsupported encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); need PCM16 or float32");
      }
      return out;
    } else {
      r.str(std::min<std::size_t>(size + (size & 1u), r.remaining()));
    }
  }
  throw FormatError("wav: no data chunk");
}

/// Encode mono audio. PCM16 output is TPDF-dithered with a fixed seed, so it is deterministic.
inline std::string encode_wav(const AudioBuffer& audio, WavEncoding enc = WavEncoding::kFloat32) {
  const bool pcm = enc == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const auto data_bytes = static_cast<std::uint32_t>(audio.size() * bits / 8);
  ByteWriter w;
  w.str("RIFF");
  w.u32(36 + data_bytes);
  w.str("WAVE");
  w.str("fmt ");
  w.u32(16);
  w.u16(pcm ? 1 : 3);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(audio.sample_rate));
  w.u32(static_cast<std::uint32_t>(audio.sample_rate) * bits / 8);
  w.u16(bits / 8);
  w.u16(bits);
  w.str("data");
  w.u32(data_bytes);
  if (pcm) {
    std::mt19937 rng(0x5eed);
    std::uniform_real_distribution<float> u(-0.5f, 0.5f);
    for (float s : audio.samples) {
      const float scaled = s * 32767.0f + u(rng) + u(rng);
      const long q = std::lround(std::clamp(scaled, -32768.0f, 32767.0f));
      w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  } else {
    w.f32s(audio.samples);
  }
  return w.take();
}

inline AudioBuffer read_wav(const std::string& path) { return decode_wav(read_file(path)); }

inline void write_wav(const std::string& path, const AudioBuffer& audio, WavEncoding enc = WavEncoding::kFloat32) {
  write_file(path, encode_wav(audio, enc));
}

}  // namespace bigvgan
