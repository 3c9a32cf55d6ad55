#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace axg {

// Mono waveform. Samples are clamped to [-1, 1] on construction.
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<float> samples, int sample_rate);

  const std::vector<float>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  double duration_seconds() const;

  friend bool operator==(const AudioClip&, const AudioClip&) = default;

 private:
  std::vector<float> samples_;
  int sample_rate_ = 16000;
};

// Seeded uniform white noise in [-amplitude, amplitude].
AudioClip generate_noise_clip(std::size_t length, double amplitude, std::uint64_t seed,
                              int sample_rate = 16000);

// RIFF/WAVE, mono, 16-bit PCM little-endian. Samples are written as round(s * 32767).
void wav_write(const AudioClip& clip, const std::filesystem::path& path);
std::vector<std::uint8_t> wav_encode(const AudioClip& clip);
// Accepts mono 16-bit PCM only; anything else raises FormatError naming the chunk.
AudioClip wav_read(const std::filesystem::path& path);
AudioClip wav_decode(std::span<const std::uint8_t> bytes);

}  // namespace axg
