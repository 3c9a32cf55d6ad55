#include "axg/dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "axg/errors.h"
#include "axg/random.h"

namespace axg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kKeywordNoiseAmplitude = 0.0316227766;  // -30 dBFS
constexpr double kEmotionNoiseAmplitude = 0.05;

// Raised-cosine attack/release gate over [start, start + length) seconds.
double gate(double t, double start, double length, double ramp) {
  if (t < start || t >= start + length) return 0.0;
  const double a = t - start, b = start + length - t;
  const double edge = std::min({a, b, ramp});
  return edge >= ramp ? 1.0 : 0.5 - 0.5 * std::cos(std::numbers::pi * edge / ramp);
}

std::vector<std::size_t> split_test(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5b117));
  rng.shuffle(order.begin(), order.end());
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(test.begin(), test.end());
  return test;
}

void assign_split(Dataset& d) {
  d.test_indices = split_test(d.clips.size(), d.spec.test_fraction, d.spec.seed);
  d.train_indices.clear();
  std::size_t j = 0;
  for (std::size_t i = 0; i < d.clips.size(); ++i) {
    if (j < d.test_indices.size() && d.test_indices[j] == i) {
      ++j;
    } else {
      d.train_indices.push_back(i);
    }
  }
}

// ---------------------------------------------------------------------------
// Keyword analogue

constexpr std::array<double, 10> kToneGrid{300, 410, 530, 670, 830, 1010, 1230, 1490, 1790, 2150};

struct Syllable {
  double f1, f2;
  double start, length;
};

std::vector<Syllable> keyword_signature(std::size_t cls) {
  const std::size_t segments = 2 + cls % 2;
  std::vector<Syllable> out;
  for (std::size_t k = 0; k < segments; ++k) {
    const double f1 = kToneGrid[(cls + 3 * k) % kToneGrid.size()];
    double f2 = kToneGrid[(7 * cls + 2 * k + 5) % kToneGrid.size()];
    if (f2 == f1) f2 = kToneGrid[(7 * cls + 2 * k + 6) % kToneGrid.size()];
    const double start = 0.06 + 0.07 * static_cast<double>(cls % 4) + 0.27 * static_cast<double>(k);
    const double length = 0.16 + 0.03 * static_cast<double>((cls + k) % 3);
    out.push_back({f1, f2, start, length});
  }
  return out;
}

AudioClip keyword_clip(const SyntheticDatasetSpec& spec, std::size_t cls, std::size_t index) {
  Rng rng(derive_seed(spec.seed, cls, index));
  const double shift = rng.uniform(-0.04, 0.04);
  const double detune = rng.uniform(0.98, 1.02);
  const double level = rng.uniform(0.3, 0.45);
  const auto sig = keyword_signature(cls);
  std::vector<double> phases;
  for (std::size_t k = 0; k < sig.size(); ++k) {
    phases.push_back(rng.uniform(0.0, kTwoPi));
    phases.push_back(rng.uniform(0.0, kTwoPi));
  }
  const double fs = spec.sample_rate;
  std::vector<float> s(spec.clip_length, 0.0f);
  for (std::size_t i = 0; i < spec.signal_length; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = 0.0;
    for (std::size_t k = 0; k < sig.size(); ++k) {
      const double g = gate(t, sig[k].start + shift, sig[k].length, 0.02);
      if (g == 0.0) continue;
      v += g * (std::sin(kTwoPi * sig[k].f1 * detune * t + phases[2 * k]) +
                0.7 * std::sin(kTwoPi * sig[k].f2 * detune * t + phases[2 * k + 1]));
    }
    v = level * v / 1.7 + rng.uniform(-kKeywordNoiseAmplitude, kKeywordNoiseAmplitude);
    s[i] = static_cast<float>(v);
  }
  return AudioClip(std::move(s), spec.sample_rate);
}

// ---------------------------------------------------------------------------
// Emotion analogue

// Emotion cues live in an accent window inside the last syllable; outside it every class
// renders the neutral carrier sample for sample.
struct Prosody {
  double pitch = 1.0;  // pitch factor reached inside the accent
  double vibrato_depth = 0.0, vibrato_rate = 0.0;
  double level = 1.0;
  double tremolo_depth = 0.0, tremolo_rate = 0.0;

  bool neutral() const {
    return pitch == 1.0 && vibrato_depth == 0.0 && level == 1.0 && tremolo_depth == 0.0;
  }
};

constexpr double kAccentLength = 0.22;
constexpr double kAccentRamp = 0.02;

Prosody prosody_for(int label) {
  switch (label) {
    case 1: return {1.45, 0.0, 0.0, 1.5, 0.0, 0.0};   // happy
    case 2: return {0.6, 0.0, 0.0, 1.8, 0.0, 0.0};    // sad
    case 3: return {1.1, 0.0, 0.0, 2.0, 0.0, 0.0};    // angry
    case 4: return {1.0, 0.08, 8.0, 1.4, 0.5, 12.0};  // fearful
    default: return {};                               // neutral
  }
}

AudioClip render_emotion(const SyntheticDatasetSpec& spec, int word, int rendition, const Prosody& p) {
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(word), static_cast<std::uint64_t>(rendition)));
  const double f0 = (140.0 + 4.0 * word) * rng.uniform(0.99, 1.01);
  const double shift = rng.uniform(-0.02, 0.02);
  const double formant = 500.0 + 150.0 * word;
  constexpr int kHarmonics = 8;
  std::array<double, kHarmonics> amp{}, phase{};
  double norm = 0.0;
  for (int h = 0; h < kHarmonics; ++h) {
    const double d = ((h + 1) * (140.0 + 4.0 * word) - formant) / 300.0;
    amp[h] = std::exp(-d * d) + 0.3 / (h + 1);
    norm += amp[h];
    phase[h] = rng.uniform(0.0, kTwoPi);
  }
  const int syllables = 1 + word % 3;
  const double span = 0.8 / syllables;
  const double last_start = 0.1 + shift + (syllables - 1) * span;
  const double accent_start = last_start + 0.5 * (0.85 * span - kAccentLength);

  const double fs = spec.sample_rate;
  const bool modulated = !p.neutral();
  Rng noise(derive_seed(spec.seed, 0x6e015e, static_cast<std::uint64_t>(word) * 1000 + static_cast<std::uint64_t>(rendition)));
  std::vector<float> s(spec.clip_length, 0.0f);
  double phi = 0.0;
  for (std::size_t i = 0; i < spec.signal_length; ++i) {
    const double t = static_cast<double>(i) / fs;
    double env = 0.0;
    for (int k = 0; k < syllables; ++k) env += gate(t, 0.1 + shift + k * span, 0.85 * span, 0.03);
    double pitch = 1.0, level = 1.0;
    if (modulated) {
      const double a = gate(t, accent_start, kAccentLength, kAccentRamp);
      if (a > 0.0) {
        const double ta = t - accent_start;
        pitch = 1.0 + a * (p.pitch - 1.0);
        if (p.vibrato_depth != 0.0) pitch *= 1.0 + a * p.vibrato_depth * std::sin(kTwoPi * p.vibrato_rate * ta);
        level = 1.0 + a * (p.level - 1.0);
        if (p.tremolo_depth != 0.0) level *= 1.0 + a * p.tremolo_depth * std::sin(kTwoPi * p.tremolo_rate * ta);
      }
    }
    double v = 0.0;
    if (env > 0.0) {
      for (int h = 0; h < kHarmonics; ++h) v += amp[h] * std::sin((h + 1) * phi + phase[h]);
    }
    s[i] = static_cast<float>(0.45 * level * env * v / norm + noise.uniform(-kEmotionNoiseAmplitude, kEmotionNoiseAmplitude));
    phi += kTwoPi * f0 * pitch / fs;
  }
  return AudioClip(std::move(s), spec.sample_rate);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(TaskKind kind) { return kind == TaskKind::Keyword ? "keyword" : "emotion"; }

TaskKind task_from_string(const std::string& name) {
  if (name == "keyword") return TaskKind::Keyword;
  if (name == "emotion") return TaskKind::Emotion;
  throw ContractError("unknown task '" + name + "' (expected keyword or emotion)");
}

const std::vector<std::string>& emotion_class_names() {
  static const std::vector<std::string> names{"neutral", "happy", "sad", "angry", "fearful"};
  return names;
}

SyntheticDatasetSpec SyntheticDatasetSpec::keyword_default(std::uint64_t seed) {
  SyntheticDatasetSpec s;
  s.task = TaskKind::Keyword;
  s.class_count = 8;
  s.clips_per_class = 100;
  s.seed = seed;
  return s;
}

SyntheticDatasetSpec SyntheticDatasetSpec::emotion_default(std::uint64_t seed) {
  SyntheticDatasetSpec s;
  s.task = TaskKind::Emotion;
  s.class_count = 5;
  s.words = 10;
  s.clips_per_class = 100;  // 10 words x 10 renditions
  s.seed = seed;
  return s;
}

void SyntheticDatasetSpec::validate() const {
  if (class_count < 2) throw ContractError("dataset spec: need at least 2 classes");
  if (clips_per_class == 0) throw ContractError("dataset spec: zero clips per class");
  if (sample_rate <= 0) throw ContractError("dataset spec: sample rate must be positive");
  if (signal_length == 0 || signal_length > clip_length) {
    throw ContractError("dataset spec: signal length must be in (0, clip_length]");
  }
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ContractError("dataset spec: test fraction outside [0, 1)");
  if (task == TaskKind::Emotion) {
    if (class_count < 3 || class_count > emotion_class_names().size()) {
      throw ContractError("dataset spec: emotion task supports 3 to 5 classes");
    }
    if (words == 0 || clips_per_class % words != 0) {
      throw ContractError("dataset spec: emotion clips per class must be a multiple of the word count");
    }
  }
}

nlohmann::json SyntheticDatasetSpec::to_json() const {
  return {{"task", to_string(task)},
          {"class_count", class_count},
          {"clips_per_class", clips_per_class},
          {"clip_length", clip_length},
          {"signal_length", signal_length},
          {"sample_rate", sample_rate},
          {"words", words},
          {"test_fraction", test_fraction},
          {"seed", seed}};
}

SyntheticDatasetSpec SyntheticDatasetSpec::from_json(const nlohmann::json& j) {
  SyntheticDatasetSpec s;
  s.task = task_from_string(j.at("task").get<std::string>());
  s.class_count = j.at("class_count").get<std::size_t>();
  s.clips_per_class = j.at("clips_per_class").get<std::size_t>();
  s.clip_length = j.at("clip_length").get<std::size_t>();
  s.signal_length = j.at("signal_length").get<std::size_t>();
  s.sample_rate = j.at("sample_rate").get<int>();
  s.words = j.at("words").get<std::size_t>();
  s.test_fraction = j.at("test_fraction").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

std::vector<AudioClip> Dataset::clips_at(const std::vector<std::size_t>& indices) const {
  std::vector<AudioClip> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(clips.at(i).clip);
  return out;
}

std::vector<int> Dataset::labels_at(const std::vector<std::size_t>& indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(clips.at(i).label);
  return out;
}

Dataset generate_keyword_dataset(const SyntheticDatasetSpec& spec) {
  spec.validate();
  if (spec.task != TaskKind::Keyword) throw ContractError("generate_keyword_dataset: spec is not a keyword task");
  Dataset d;
  d.spec = spec;
  for (std::size_t c = 0; c < spec.class_count; ++c) d.class_names.push_back("keyword_" + std::to_string(c));
  for (std::size_t c = 0; c < spec.class_count; ++c) {
    for (std::size_t i = 0; i < spec.clips_per_class; ++i) {
      d.clips.push_back({keyword_clip(spec, c, i), static_cast<int>(c), -1, static_cast<int>(i)});
    }
  }
  assign_split(d);
  return d;
}

AudioClip emotion_carrier(const SyntheticDatasetSpec& spec, int word, int rendition) {
  return render_emotion(spec, word, rendition, Prosody{});
}

AudioClip emotion_clip(const SyntheticDatasetSpec& spec, int word, int label, int rendition) {
  return render_emotion(spec, word, rendition, prosody_for(label));
}

Dataset generate_emotion_dataset(const SyntheticDatasetSpec& spec) {
  spec.validate();
  if (spec.task != TaskKind::Emotion) throw ContractError("generate_emotion_dataset: spec is not an emotion task");
  Dataset d;
  d.spec = spec;
  d.class_names.assign(emotion_class_names().begin(),
                       emotion_class_names().begin() + static_cast<std::ptrdiff_t>(spec.class_count));
  d.neutral_class = 0;
  const auto renditions = static_cast<int>(spec.clips_per_class / spec.words);
  for (std::size_t c = 0; c < spec.class_count; ++c) {
    for (std::size_t w = 0; w < spec.words; ++w) {
      for (int r = 0; r < renditions; ++r) {
        const int word = static_cast<int>(w);
        d.clips.push_back({emotion_clip(spec, word, static_cast<int>(c), r), static_cast<int>(c), word, r});
      }
    }
  }
  assign_split(d);
  return d;
}

Dataset generate_dataset(const SyntheticDatasetSpec& spec) {
  return spec.task == TaskKind::Keyword ? generate_keyword_dataset(spec) : generate_emotion_dataset(spec);
}

// ---------------------------------------------------------------------------
// Persistence

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json clips = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    const auto& c = dataset.clips[i];
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%05zu.wav", i);
    wav_write(c.clip, dir / name);
    clips.push_back({{"file", name}, {"label", c.label}, {"word", c.word}, {"rendition", c.rendition}});
  }
  const nlohmann::json manifest = {{"version", 1},
                                   {"spec", dataset.spec.to_json()},
                                   {"class_names", dataset.class_names},
                                   {"neutral_class", dataset.neutral_class},
                                   {"clips", clips},
                                   {"train_indices", dataset.train_indices},
                                   {"test_indices", dataset.test_indices}};
  std::ofstream f(dir / "manifest.json");
  f << manifest.dump(1) << '\n';
  if (!f) throw FormatError("failed writing " + (dir / "manifest.json").string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw FormatError("no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }
  Dataset d;
  try {
    if (m.at("version").get<int>() != 1) throw ParseError("manifest.json: unsupported version");
    d.spec = SyntheticDatasetSpec::from_json(m.at("spec"));
    d.class_names = m.at("class_names").get<std::vector<std::string>>();
    d.neutral_class = m.at("neutral_class").get<int>();
    for (const auto& c : m.at("clips")) {
      LabeledClip lc;
      lc.clip = wav_read(dir / c.at("file").get<std::string>());
      lc.label = c.at("label").get<int>();
      lc.word = c.at("word").get<int>();
      lc.rendition = c.at("rendition").get<int>();
      if (lc.label < 0 || static_cast<std::size_t>(lc.label) >= d.class_names.size()) {
        throw ParseError("manifest.json: label out of range");
      }
      d.clips.push_back(std::move(lc));
    }
    d.train_indices = m.at("train_indices").get<std::vector<std::size_t>>();
    d.test_indices = m.at("test_indices").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }
  for (auto i : d.train_indices) {
    if (i >= d.clips.size()) throw ParseError("manifest.json: train index out of range");
  }
  for (auto i : d.test_indices) {
    if (i >= d.clips.size()) throw ParseError("manifest.json: test index out of range");
  }
  return d;
}

}  // namespace axg
