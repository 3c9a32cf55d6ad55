#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/audio.h"

namespace axg {

enum class TaskKind { Keyword, Emotion };

std::string to_string(TaskKind kind);
TaskKind task_from_string(const std::string& name);

struct SyntheticDatasetSpec {
  TaskKind task = TaskKind::Keyword;
  std::size_t class_count = 8;
  std::size_t clips_per_class = 100;
  std::size_t clip_length = 16384;    // stored length, a multiple of the codec stride product
  std::size_t signal_length = 16000;  // content length; the rest is zero padding
  int sample_rate = 16000;
  std::size_t words = 10;             // emotion task: carrier words per class
  double test_fraction = 0.2;
  std::uint64_t seed = 1;

  static SyntheticDatasetSpec keyword_default(std::uint64_t seed = 1);
  static SyntheticDatasetSpec emotion_default(std::uint64_t seed = 2);

  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticDatasetSpec from_json(const nlohmann::json& j);
};

struct LabeledClip {
  AudioClip clip;
  int label = 0;
  int word = -1;       // emotion task only
  int rendition = 0;
};

struct Dataset {
  SyntheticDatasetSpec spec;
  std::vector<std::string> class_names;
  int neutral_class = -1;
  std::vector<LabeledClip> clips;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  std::vector<AudioClip> clips_at(const std::vector<std::size_t>& indices) const;
  std::vector<int> labels_at(const std::vector<std::size_t>& indices) const;
};

// Each class is a fixed sequence of tone pairs with its own onset pattern; clips add
// seeded timing/pitch/level jitter and -30 dBFS white noise.
Dataset generate_keyword_dataset(const SyntheticDatasetSpec& spec);

// Shared harmonic carrier words; non-neutral classes modulate pitch and amplitude inside an
// accent window of the last syllable. The neutral class (label 0) is the unmodulated carrier.
Dataset generate_emotion_dataset(const SyntheticDatasetSpec& spec);

Dataset generate_dataset(const SyntheticDatasetSpec& spec);

// Unmodulated carrier of one (word, rendition); the neutral clip is exactly this.
AudioClip emotion_carrier(const SyntheticDatasetSpec& spec, int word, int rendition);
AudioClip emotion_clip(const SyntheticDatasetSpec& spec, int word, int label, int rendition);

const std::vector<std::string>& emotion_class_names();

// Directory of WAV files plus manifest.json (labels, split indices, spec echo).
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace axg
