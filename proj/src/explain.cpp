#include "axg/explain.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "axg/errors.h"

namespace axg {

std::string to_string(SelectionMode mode) { return mode == SelectionMode::KeepTop ? "keep-top" : "remove-top"; }
std::string to_string(Ranking ranking) { return ranking == Ranking::Signed ? "signed" : "absolute"; }
std::string to_string(Granularity g) {
  switch (g) {
    case Granularity::Cell: return "cell";
    case Granularity::Channel: return "channel";
    case Granularity::Frame: return "frame";
  }
  return "unknown";
}

Ranking ranking_from_string(const std::string& name) {
  if (name == "signed") return Ranking::Signed;
  if (name == "absolute") return Ranking::Absolute;
  throw ContractError("unknown ranking '" + name + "'");
}

Granularity granularity_from_string(const std::string& name) {
  for (auto g : {Granularity::Cell, Granularity::Channel, Granularity::Frame}) {
    if (to_string(g) == name) return g;
  }
  throw ContractError("unknown granularity '" + name + "'");
}

std::size_t SelectionMask::count() const {
  return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), std::uint8_t{1}));
}

std::vector<std::size_t> SelectionMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) out.push_back(i);
  }
  return out;
}

SelectionMask SelectionMask::complement() const {
  SelectionMask m = *this;
  for (auto& s : m.selected) s = s ? 0 : 1;
  m.ratio = 1.0 - ratio;
  m.mode = mode == SelectionMode::KeepTop ? SelectionMode::RemoveTop : SelectionMode::KeepTop;
  return m;
}

LatentGrid make_base_latent(const CodecModel& codec, std::size_t length, std::uint64_t seed, double amplitude) {
  if (length < codec.config.receptive_field()) {
    throw LengthError("base latent: noise length " + std::to_string(length) + " below receptive field " +
                      std::to_string(codec.config.receptive_field()));
  }
  return encode(generate_noise_clip(length, amplitude, seed, codec.config.sample_rate), codec);
}

SelectionMask select_top(const AttributionMap& att, double ratio, SelectionMode mode,
                         const SelectionOptions& options) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ContractError("selection ratio must lie in [0, 1]");
  if (att.scores.size() != att.rows * att.cols) throw DimensionError("attribution map shape/score mismatch");

  // Aggregate scores to the selection unit.
  std::vector<double> unit;
  switch (options.granularity) {
    case Granularity::Cell:
      unit.assign(att.scores.begin(), att.scores.end());
      break;
    case Granularity::Channel:
      unit.assign(att.cols, 0.0);
      for (std::size_t r = 0; r < att.rows; ++r) {
        for (std::size_t c = 0; c < att.cols; ++c) unit[c] += att.at(r, c);
      }
      break;
    case Granularity::Frame:
      unit.assign(att.rows, 0.0);
      for (std::size_t r = 0; r < att.rows; ++r) {
        for (std::size_t c = 0; c < att.cols; ++c) unit[r] += att.at(r, c);
      }
      break;
  }
  if (options.ranking == Ranking::Absolute) {
    for (auto& v : unit) v = std::abs(v);
  }
  std::vector<std::size_t> order(unit.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return unit[a] > unit[b]; });
  const auto take = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(unit.size())));

  SelectionMask mask;
  mask.rows = att.rows;
  mask.cols = att.cols;
  mask.selected.assign(att.rows * att.cols, 0);
  mask.ratio = ratio;
  mask.mode = mode;
  mask.source = att.method;
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t u = order[i];
    switch (options.granularity) {
      case Granularity::Cell:
        mask.selected[u] = 1;
        break;
      case Granularity::Channel:
        for (std::size_t r = 0; r < att.rows; ++r) mask.selected[r * att.cols + u] = 1;
        break;
      case Granularity::Frame:
        for (std::size_t c = 0; c < att.cols; ++c) mask.selected[u * att.cols + c] = 1;
        break;
    }
  }
  return mask;
}

namespace {

void check_mask_shapes(const LatentGrid& z, const SelectionMask& mask, const LatentGrid& base) {
  if (z.frames != base.frames || z.channels != base.channels) {
    throw DimensionError("latent and base grids differ in shape");
  }
  if (mask.rows != z.frames || mask.cols != z.channels || mask.selected.size() != z.size()) {
    throw DimensionError("mask shape does not match latent grid");
  }
}

}  // namespace

LatentGrid apply_mask_keep(const LatentGrid& z, const SelectionMask& mask, const LatentGrid& base) {
  check_mask_shapes(z, mask, base);
  LatentGrid out = base;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask.selected[i]) out.values[i] = z.values[i];
  }
  return out;
}

LatentGrid apply_mask_remove(const LatentGrid& z, const SelectionMask& mask, const LatentGrid& base) {
  check_mask_shapes(z, mask, base);
  LatentGrid out = z;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask.selected[i]) out.values[i] = base.values[i];
  }
  return out;
}

AudioClip synthesize_explanation(const LatentGrid& z_masked, const CodecModel& codec) {
  return decode(z_masked, codec);
}

AudioClip mask_input_space(const AudioClip& x, const AttributionMap& att, double ratio, const AudioClip& noise,
                           SelectionMode mode, const SelectionOptions& options) {
  if (att.rows * att.cols != x.size() || noise.size() != x.size()) {
    throw DimensionError("input masking: clip " + std::to_string(x.size()) + ", attribution " +
                         std::to_string(att.rows * att.cols) + " and noise " + std::to_string(noise.size()) +
                         " lengths differ");
  }
  SelectionOptions opts = options;
  opts.granularity = Granularity::Cell;
  const SelectionMask mask = select_top(att, ratio, mode, opts);
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool from_x = mode == SelectionMode::KeepTop ? mask.selected[i] != 0 : mask.selected[i] == 0;
    out[i] = from_x ? x.samples()[i] : noise.samples()[i];
  }
  return AudioClip(std::move(out), x.sample_rate());
}

}  // namespace axg
