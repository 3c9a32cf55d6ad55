#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "axg/audio.h"
#include "axg/errors.h"
#include "axg/random.h"

using namespace axg;

namespace {

std::vector<std::uint8_t> sample_wav() {
  return wav_encode(AudioClip({0.0f, 0.5f, -0.5f, 1.0f, -1.0f}, 16000));
}

TEST(AudioClip, ClampsOnConstruction) {
  AudioClip c({2.0f, -3.0f, 0.25f, std::nanf("")}, 8000);
  EXPECT_EQ(c.samples(), (std::vector<float>{1.0f, -1.0f, 0.25f, 0.0f}));
  EXPECT_EQ(c.sample_rate(), 8000);
  EXPECT_DOUBLE_EQ(c.duration_seconds(), 4.0 / 8000.0);
}

TEST(Noise, SilenceAtZeroAmplitude) {
  const AudioClip silence = generate_noise_clip(100, 0.0, 3);
  for (float v : silence.samples()) EXPECT_EQ(v, 0.0f);
}

TEST(Noise, SeededAndBounded) {
  const auto a = generate_noise_clip(1000, 0.1, 4);
  EXPECT_EQ(a, generate_noise_clip(1000, 0.1, 4));
  EXPECT_NE(a, generate_noise_clip(1000, 0.1, 5));
  for (float v : a.samples()) EXPECT_LE(std::abs(v), 0.1f);
}

// The mean of N uniform(-a, a) draws has standard error a / sqrt(3N).
TEST(Noise, MeanWithinThreeSigma) {
  const std::size_t n = 16384;
  const double a = 0.1;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto clip = generate_noise_clip(n, a, seed);
    double mean = 0.0;
    for (float v : clip.samples()) mean += v;
    mean /= static_cast<double>(n);
    EXPECT_LT(std::abs(mean), 3.0 * a / std::sqrt(3.0 * n)) << "seed " << seed;
  }
}

TEST(Wav, RoundTripWithinQuantization) {
  Rng rng(1);
  std::vector<float> s(4000);
  for (auto& v : s) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const AudioClip clip(s, 16000);
  const auto path = std::filesystem::temp_directory_path() / "axg_test_roundtrip.wav";
  wav_write(clip, path);
  const AudioClip back = wav_read(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), clip.size());
  EXPECT_EQ(back.sample_rate(), 16000);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LE(std::abs(back.samples()[i] - s[i]), 1.0f / 32767.0f);
}

TEST(Wav, QuantizedRoundTripIsExact) {
  const AudioClip once = wav_decode(sample_wav());
  EXPECT_EQ(wav_decode(wav_encode(once)), once);
}

TEST(Wav, HeaderLayout) {
  const auto b = sample_wav();
  ASSERT_EQ(b.size(), 44u + 10u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "RIFF");
  EXPECT_EQ(std::string(b.begin() + 8, b.begin() + 12), "WAVE");
  EXPECT_EQ(b[22], 1);   // mono
  EXPECT_EQ(b[34], 16);  // bits per sample
  // 0.5 -> round(16383.5) = 16384
  EXPECT_EQ(b[46] | (b[47] << 8), 16384);
}

TEST(Wav, StereoRejected) {
  auto b = sample_wav();
  b[22] = 2;
  try {
    wav_decode(b);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("fmt"), std::string::npos);
  }
}

TEST(Wav, NonPcmAndBitDepthRejected) {
  auto b = sample_wav();
  b[20] = 3;  // IEEE float
  EXPECT_THROW(wav_decode(b), FormatError);
  b = sample_wav();
  b[34] = 24;
  EXPECT_THROW(wav_decode(b), FormatError);
}

TEST(Wav, TruncatedRejected) {
  const auto b = sample_wav();
  EXPECT_THROW(wav_decode(std::span(b.data(), 20)), FormatError);
  EXPECT_THROW(wav_decode(std::span(b.data(), 48)), FormatError);
  EXPECT_THROW(wav_read("/nonexistent/file.wav"), FormatError);
}

TEST(Wav, UnknownChunksSkipped) {
  auto b = sample_wav();
  // Insert a LIST chunk between fmt and data.
  std::vector<std::uint8_t> list{'L', 'I', 'S', 'T', 4, 0, 0, 0, 'a', 'b', 'c', 'd'};
  b.insert(b.begin() + 36, list.begin(), list.end());
  const std::uint32_t riff = static_cast<std::uint32_t>(b.size() - 8);
  for (int i = 0; i < 4; ++i) b[4 + i] = static_cast<std::uint8_t>(riff >> (8 * i));
  EXPECT_EQ(wav_decode(b), wav_decode(sample_wav()));
}

}  // namespace
