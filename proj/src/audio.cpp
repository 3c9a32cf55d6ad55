#include "axg/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "axg/errors.h"
#include "axg/random.h"

namespace axg {

AudioClip::AudioClip(std::vector<float> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate <= 0) throw ContractError("sample rate must be positive");
  for (auto& s : samples_) s = std::isnan(s) ? 0.0f : std::clamp(s, -1.0f, 1.0f);
}

double AudioClip::duration_seconds() const {
  return static_cast<double>(samples_.size()) / static_cast<double>(sample_rate_);
}

AudioClip generate_noise_clip(std::size_t length, double amplitude, std::uint64_t seed, int sample_rate) {
  if (length == 0) throw ContractError("noise clip length must be positive");
  Rng rng(seed);
  std::vector<float> s(length);
  for (auto& v : s) v = static_cast<float>(rng.uniform(-amplitude, amplitude));
  return AudioClip(std::move(s), sample_rate);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
std::string get_tag(std::span<const std::uint8_t> b, std::size_t at) {
  return std::string(reinterpret_cast<const char*>(b.data() + at), 4);
}

}  // namespace

std::vector<std::uint8_t> wav_encode(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (float s : clip.samples()) {
    const long q = std::lround(static_cast<double>(s) * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32767L, 32767L))));
  }
  return out;
}

void wav_write(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = wav_encode(clip);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

AudioClip wav_decode(std::span<const std::uint8_t> b) {
  if (b.size() < 12) throw FormatError("RIFF: truncated header");
  if (get_tag(b, 0) != "RIFF") throw FormatError("RIFF: missing RIFF tag");
  if (get_tag(b, 8) != "WAVE") throw FormatError("RIFF: form type is not WAVE");

  bool have_fmt = false;
  std::uint32_t rate = 0;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string tag = get_tag(b, at);
    const std::uint32_t size = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (body + size > b.size()) throw FormatError(tag + ": chunk truncated");
    if (tag == "fmt ") {
      if (size < 16) throw FormatError("fmt : chunk too short");
      const auto format = get_u16(b, body);
      const auto channels = get_u16(b, body + 2);
      const auto bits = get_u16(b, body + 14);
      if (format != 1) throw FormatError("fmt : unsupported encoding " + std::to_string(format) + " (PCM only)");
      if (channels != 1) throw FormatError("fmt : " + std::to_string(channels) + " channels (mono only)");
      if (bits != 16) throw FormatError("fmt : " + std::to_string(bits) + "-bit samples (16-bit only)");
      rate = get_u32(b, body + 4);
      if (rate == 0) throw FormatError("fmt : zero sample rate");
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw FormatError("data: chunk precedes fmt ");
      if (size % 2 != 0) throw FormatError("data: odd byte count for 16-bit samples");
      std::vector<float> s(size / 2);
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = static_cast<float>(static_cast<std::int16_t>(get_u16(b, body + 2 * i))) / 32767.0f;
      }
      return AudioClip(std::move(s), static_cast<int>(rate));
    }
    at = body + size + (size & 1u);
  }
  if (at < b.size()) throw FormatError("RIFF: truncated chunk header");
  throw FormatError(have_fmt ? "data: chunk missing" : "fmt : chunk missing");
}

AudioClip wav_read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return wav_decode(bytes);
}

}  // namespace axg
