#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/attribution.h"
#include "axg/classifier.h"
#include "axg/codec.h"
#include "axg/dataset.h"
#include "axg/eval.h"
#include "axg/explain.h"

namespace axg {

struct RunPaths {
  std::filesystem::path data = "run/data";
  std::filesystem::path checkpoints = "run/checkpoints";
  std::filesystem::path reports = "run/reports";
};

struct RunSeeds {
  std::uint64_t codec = 7;
  std::uint64_t classifier = 11;
  std::uint64_t noise = 4;
  std::uint64_t random = 100;
};

struct EvalGrid {
  std::size_t runs = 5;
  std::vector<double> alphas{0.1, 0.2, 0.4, 0.6, 0.8};
  std::vector<double> betas{0.01, 0.1, 0.2, 0.4, 0.6, 0.8};
  double confusion_beta = 0.1;
  std::vector<AttributionMethod> methods{AttributionMethod::LatentIG, AttributionMethod::RandomLatent,
                                         AttributionMethod::InputIG, AttributionMethod::RandomInput};
  std::size_t jobs = 1;
};

struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  RunPaths paths;
  RunSeeds seeds;
  SyntheticDatasetSpec keyword = SyntheticDatasetSpec::keyword_default();
  SyntheticDatasetSpec emotion = SyntheticDatasetSpec::emotion_default();
  std::vector<TaskKind> codec_tasks{TaskKind::Keyword, TaskKind::Emotion};  // datasets whose train split trains the codec
  CodecConfig codec;
  CodecTrainConfig codec_train;
  ClassifierConfig classifier;
  std::size_t ig_steps = 64;
  double noise_amplitude = 0.1;
  SelectionOptions selection;
  EvalGrid eval;

  nlohmann::json to_json() const;
  // Strict: unknown keys, a missing or different schema_version and invalid values raise ConfigError.
  // Keys absent from `j` keep their defaults. Relative paths are resolved against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

  // sha256 of the canonical JSON dump.
  std::string hash() const;
  const SyntheticDatasetSpec& dataset_spec(TaskKind task) const;
  EvalOptions eval_options() const;
};

// Applies "a.b.c=value" overrides to a config document. The value is parsed as JSON when
// possible and taken as a string otherwise.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& assignments);

// Reads a config file (or starts from defaults when `path` is empty), applies overrides and validates.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

std::filesystem::path codec_checkpoint_path(const RunConfig& config);
std::filesystem::path classifier_checkpoint_path(const RunConfig& config, TaskKind task);
std::filesystem::path dataset_dir(const RunConfig& config, TaskKind task);

struct StageResult {
  std::string stage;
  std::vector<std::filesystem::path> artifacts;
  std::filesystem::path provenance;
  std::string summary;  // human-readable, one or more lines
};

// Every stage writes provenance-<stage>[-<task>].json next to its outputs: the config, its hash,
// seeds, hashes of the checkpoints it read and of the artifacts it wrote.
StageResult run_synth_data(const RunConfig& config);
StageResult run_train_codec(const RunConfig& config, const EpochCallback& on_epoch = {});
StageResult run_train_classifier(const RunConfig& config, TaskKind task);

struct ExplainRequest {
  TaskKind task = TaskKind::Keyword;
  std::filesystem::path input;
  double alpha = 0.2;
  SelectionMode mode = SelectionMode::KeepTop;
  std::filesystem::path out;
  std::filesystem::path reconstruction;  // optional: also write the plain reconstruction here
};
StageResult run_explain(const RunConfig& config, const ExplainRequest& request);

StageResult run_eval_fidelity(const RunConfig& config, TaskKind task);
StageResult run_eval_drop(const RunConfig& config, TaskKind task);
StageResult run_confusion(const RunConfig& config, TaskKind task);

// Exit code for an exception escaping a stage: 2 missing checkpoint, 3 bad config, 4 data error, 1 otherwise.
int exit_code_for(const std::exception& e);
// One-line JSON error record.
std::string error_line(const std::exception& e);

}  // namespace axg
