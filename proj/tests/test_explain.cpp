#include <gtest/gtest.h>

#include "axg/codec.h"
#include "axg/errors.h"
#include "axg/explain.h"
#include "test_support.h"

using namespace axg;

namespace {

AttributionMap grid_map(std::size_t rows, std::size_t cols, std::vector<float> scores) {
  AttributionMap m;
  m.rows = rows;
  m.cols = cols;
  m.scores = std::move(scores);
  return m;
}

LatentGrid random_grid(std::size_t t, std::size_t l, std::uint64_t seed) {
  Rng rng(seed);
  LatentGrid z(t, l);
  for (auto& v : z.values) v = static_cast<float>(rng.uniform(-1, 1));
  return z;
}

TEST(SelectTop, DirectOrdering) {
  const SelectionMask m = select_top(grid_map(2, 2, {0.9f, 0.1f, 0.5f, 0.3f}), 0.5);
  EXPECT_EQ(m.indices(), (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(m.contains(0, 0));
  EXPECT_TRUE(m.contains(1, 0));
  EXPECT_EQ(m.count(), 2u);
}

TEST(SelectTop, Boundaries) {
  const auto att = grid_map(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(select_top(att, 0.0).count(), 0u);
  EXPECT_EQ(select_top(att, 1.0).count(), 6u);
  EXPECT_THROW(select_top(att, 1.5), ContractError);
  EXPECT_THROW(select_top(att, -0.1), ContractError);
}

TEST(SelectTop, TieRuleRowMajor) {
  const SelectionMask m = select_top(grid_map(2, 4, std::vector<float>(8, 0.7f)), 0.5);
  EXPECT_EQ(m.indices(), (std::vector<std::size_t>{0, 1, 2, 3}));
  // Partial ties: the lower index wins within the tied score.
  const SelectionMask p = select_top(grid_map(1, 5, {0.2f, 0.9f, 0.5f, 0.9f, 0.5f}), 0.6);
  EXPECT_EQ(p.indices(), (std::vector<std::size_t>{1, 2, 3}));
}

TEST(SelectTop, SignedVersusAbsolute) {
  const auto att = grid_map(1, 4, {-5.0f, 1.0f, 2.0f, -0.5f});
  EXPECT_EQ(select_top(att, 0.25).indices(), (std::vector<std::size_t>{2}));
  SelectionOptions abs;
  abs.ranking = Ranking::Absolute;
  EXPECT_EQ(select_top(att, 0.25, SelectionMode::KeepTop, abs).indices(), (std::vector<std::size_t>{0}));
}

TEST(SelectTop, ChannelAndFrameGranularity) {
  // Column sums: 3, 12, 6. Row sums: 6, 15.
  const auto att = grid_map(2, 3, {1, 4, 1, 2, 8, 5});
  SelectionOptions ch;
  ch.granularity = Granularity::Channel;
  const SelectionMask c = select_top(att, 0.34, SelectionMode::KeepTop, ch);
  EXPECT_EQ(c.indices(), (std::vector<std::size_t>{1, 4}));
  SelectionOptions fr;
  fr.granularity = Granularity::Frame;
  const SelectionMask f = select_top(att, 0.5, SelectionMode::KeepTop, fr);
  EXPECT_EQ(f.indices(), (std::vector<std::size_t>{3, 4, 5}));
}

TEST(SelectTop, MonotoneContainment) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    auto att = grid_map(16, 8, std::vector<float>(128));
    // Coarse scores force many ties.
    for (auto& v : att.scores) v = static_cast<float>(static_cast<int>(rng.uniform(0, 6)));
    SelectionMask prev = select_top(att, 0.0);
    for (double a = 0.05; a <= 1.0001; a += 0.05) {
      const SelectionMask cur = select_top(att, std::min(a, 1.0));
      for (std::size_t i : prev.indices()) EXPECT_TRUE(cur.selected[i]) << "seed " << seed << " alpha " << a;
      prev = cur;
    }
  }
}

TEST(Masking, KeepDefinitionAndIdentities) {
  const LatentGrid z(2, 2, {1, 2, 3, 4});
  const LatentGrid b(2, 2, {-1, -2, -3, -4});
  const SelectionMask one = select_top(grid_map(2, 2, {9, 0, 0, 0}), 0.25);
  EXPECT_EQ(apply_mask_keep(z, one, b).values, (std::vector<float>{1, -2, -3, -4}));
  const auto att = grid_map(2, 2, {1, 2, 3, 4});
  EXPECT_EQ(apply_mask_keep(z, select_top(att, 1.0), b), z);
  EXPECT_EQ(apply_mask_keep(z, select_top(att, 0.0), b), b);
  EXPECT_EQ(apply_mask_remove(z, select_top(att, 0.0), b), z);
  EXPECT_EQ(apply_mask_remove(z, select_top(att, 1.0), b), b);
  EXPECT_THROW(apply_mask_keep(z, one, LatentGrid(2, 3)), DimensionError);
  EXPECT_THROW(apply_mask_remove(LatentGrid(3, 2), one, LatentGrid(3, 2)), DimensionError);
}

TEST(Masking, KeepRemoveDuality) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LatentGrid z = random_grid(12, 5, seed), b = random_grid(12, 5, seed + 100);
    const AttributionMap att = random_attribution(12, 5, seed + 200);
    for (double r : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      const SelectionMask m = select_top(att, r, SelectionMode::RemoveTop);
      EXPECT_EQ(apply_mask_remove(z, m, b), apply_mask_keep(z, m.complement(), b));
      EXPECT_EQ(m.complement().complement().selected, m.selected);
      EXPECT_EQ(m.complement().count() + m.count(), 60u);
    }
  }
}

TEST(BaseLatent, SeededShapeAndNonzero) {
  const CodecModel codec = init_codec(CodecConfig{}, 1);
  const LatentGrid a = make_base_latent(codec, 1024, 4);
  EXPECT_EQ(a, make_base_latent(codec, 1024, 4));
  EXPECT_NE(a, make_base_latent(codec, 1024, 5));
  EXPECT_EQ(a.frames, 16u);
  EXPECT_EQ(a.channels, 32u);
  EXPECT_EQ(a, encode(generate_noise_clip(1024, 0.1, 4), codec));
  bool nonzero = false;
  for (float v : a.values) nonzero |= v != 0.0f;
  EXPECT_TRUE(nonzero);
  EXPECT_THROW(make_base_latent(codec, 64, 4), LengthError);
}

TEST(Synthesis, IdentityAndBaselinePaths) {
  const CodecModel codec = init_codec(CodecConfig{}, 1);
  const AudioClip x = generate_noise_clip(2048, 0.6, 9);
  const LatentGrid z = encode(x, codec);
  const LatentGrid base = make_base_latent(codec, 2048, 4);
  const AttributionMap att = random_attribution(z.frames, z.channels, 3);
  const AudioClip full = synthesize_explanation(apply_mask_keep(z, select_top(att, 1.0), base), codec);
  EXPECT_EQ(full, decode(z, codec));
  EXPECT_EQ(synthesize_explanation(apply_mask_keep(z, select_top(att, 0.0), base), codec), decode(base, codec));
  const AudioClip partial = synthesize_explanation(apply_mask_keep(z, select_top(att, 0.3), base), codec);
  for (float v : partial.samples()) {
    EXPECT_LE(std::abs(v), 1.0f);
  }
  EXPECT_THROW(synthesize_explanation(LatentGrid(4, 7), codec), DimensionError);
}

TEST(InputMasking, RatiosAndCounting) {
  const AudioClip x = generate_noise_clip(200, 0.5, 1);
  const AudioClip noise = generate_noise_clip(200, 0.1, 2);
  const AttributionMap att = random_attribution(1, 200, 3, AttributionMethod::RandomInput);
  EXPECT_EQ(mask_input_space(x, att, 1.0, noise), x);
  EXPECT_EQ(mask_input_space(x, att, 0.0, noise), noise);
  for (double r : {0.1, 0.25, 0.5}) {
    const AudioClip k = mask_input_space(x, att, r, noise);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      if (k.samples()[i] == x.samples()[i] && x.samples()[i] != noise.samples()[i]) ++kept;
    }
    EXPECT_EQ(kept, static_cast<std::size_t>(std::llround(r * 200)));
    const AudioClip rm = mask_input_space(x, att, r, noise, SelectionMode::RemoveTop);
    for (std::size_t i = 0; i < 200; ++i) {
      EXPECT_EQ(rm.samples()[i], k.samples()[i] == x.samples()[i] ? noise.samples()[i] : x.samples()[i]);
    }
  }
  EXPECT_THROW(mask_input_space(x, att, 0.5, generate_noise_clip(100, 0.1, 2)), DimensionError);
}

}  // namespace
