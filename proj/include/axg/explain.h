#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "axg/attribution.h"
#include "axg/audio.h"
#include "axg/codec.h"

namespace axg {

enum class SelectionMode { KeepTop, RemoveTop };
enum class Ranking { Signed, Absolute };
// Cell selects individual (t, l) entries; Channel and Frame select whole columns / rows
// ranked by their summed score.
enum class Granularity { Cell, Channel, Frame };

std::string to_string(SelectionMode mode);
std::string to_string(Ranking ranking);
std::string to_string(Granularity granularity);
Ranking ranking_from_string(const std::string& name);
Granularity granularity_from_string(const std::string& name);

struct SelectionOptions {
  Ranking ranking = Ranking::Signed;
  Granularity granularity = Granularity::Cell;
};

// The top-ranked cells of an attribution map. `mode` records whether the caller keeps
// or removes them; apply_mask_keep / apply_mask_remove decide what happens.
struct SelectionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> selected;
  double ratio = 0.0;
  SelectionMode mode = SelectionMode::KeepTop;
  AttributionMethod source = AttributionMethod::LatentIG;

  std::size_t count() const;
  bool contains(std::size_t r, std::size_t c) const { return selected[r * cols + c] != 0; }
  std::vector<std::size_t> indices() const;  // row-major, ascending
  SelectionMask complement() const;
};

// Encodes seeded white noise of the given length (amplitude 0.1 by default).
LatentGrid make_base_latent(const CodecModel& codec, std::size_t length, std::uint64_t seed,
                            double amplitude = 0.1);

// Descending score, ties broken by ascending row-major index; keeps round(ratio * units).
SelectionMask select_top(const AttributionMap& att, double ratio, SelectionMode mode = SelectionMode::KeepTop,
                         const SelectionOptions& options = {});

// Selected cells from z, the rest from base.
LatentGrid apply_mask_keep(const LatentGrid& z, const SelectionMask& mask, const LatentGrid& base);
// Selected cells from base, the rest from z.
LatentGrid apply_mask_remove(const LatentGrid& z, const SelectionMask& mask, const LatentGrid& base);

AudioClip synthesize_explanation(const LatentGrid& z_masked, const CodecModel& codec);

// Input-space analogue over a 1 x N attribution: keep-top keeps the top samples of x and
// fills the rest from noise; remove-top replaces the top samples with noise.
AudioClip mask_input_space(const AudioClip& x, const AttributionMap& att, double ratio, const AudioClip& noise,
                           SelectionMode mode = SelectionMode::KeepTop, const SelectionOptions& options = {});

}  // namespace axg
