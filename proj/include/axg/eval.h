#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/attribution.h"
#include "axg/classifier.h"
#include "axg/codec.h"
#include "axg/explain.h"

namespace axg {

enum class MetricKind { Agreement, PostRemovalAccuracy };

std::string to_string(MetricKind kind);

struct ReportRow {
  double ratio = 0.0;
  double mean = 0.0;  // percent
  double std = 0.0;   // population std over runs, percent
  std::vector<double> per_run;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
  static constexpr int kVersion = 1;

  std::string dataset;
  AttributionMethod method = AttributionMethod::LatentIG;
  MetricKind metric = MetricKind::Agreement;
  std::vector<ReportRow> rows;
  std::size_t runs = 0;
  std::vector<std::uint64_t> seeds;
  nlohmann::json config = nlohmann::json::object();

  const ReportRow& row(double ratio) const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

nlohmann::json report_to_json(const EvalReport& report);
// Throws ParseError on a missing field or unknown version.
EvalReport report_from_json(const nlohmann::json& j);
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);
// Columns ratio,mean,std; one row per ratio.
std::string report_csv(const EvalReport& report);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> counts;  // [true][predicted]
  double ratio = 0.0;
  AttributionMethod method = AttributionMethod::LatentIG;

  std::size_t row_sum(std::size_t r) const;
  // Most frequent predicted class over rows whose true class is not `excluded` (-1: all rows).
  int modal_prediction(int excluded = -1) const;
  nlohmann::json to_json() const;
};

struct EvalOptions {
  std::size_t ig_steps = 64;
  std::uint64_t noise_seed = 4;
  double noise_amplitude = 0.1;
  SelectionOptions selection{};
  std::uint64_t random_seed = 100;  // run r of a random baseline uses seed random_seed + r
  std::size_t jobs = 1;

  nlohmann::json to_json() const;
};

// Fidelity protocol over one labelled test set with frozen codec and classifier.
// Deterministic attributions are computed once per sample and reused across runs/ratios.
class Evaluator {
 public:
  Evaluator(const CodecModel& codec, const ClassifierModel& classifier, std::vector<AudioClip> clips,
            std::vector<int> labels, EvalOptions options, std::string dataset_id);

  std::size_t size() const { return clips_.size(); }
  const std::vector<LatentGrid>& latents() const { return latents_; }
  const std::vector<int>& predictions() const { return predictions_; }
  const std::vector<int>& labels() const { return labels_; }
  const LatentGrid& base_latent() const { return base_; }
  const AudioClip& noise_clip() const { return noise_; }
  double baseline_accuracy() const;  // percent

  std::vector<std::uint64_t> default_seeds(std::size_t runs) const;

  // Deterministic methods ignore run_seed.
  AttributionMap attribution(AttributionMethod method, std::size_t sample, std::uint64_t run_seed);

  // Prediction for the explanation embedding of one sample.
  int masked_prediction(AttributionMethod method, std::size_t sample, double ratio, SelectionMode mode,
                        std::uint64_t run_seed);

  EvalReport fidelity_agreement(AttributionMethod method, const std::vector<double>& ratios,
                                const std::vector<std::uint64_t>& seeds);
  EvalReport accuracy_drop(AttributionMethod method, const std::vector<double>& ratios,
                           const std::vector<std::uint64_t>& seeds);
  ConfusionMatrix confusion_after_removal(double ratio, AttributionMethod method = AttributionMethod::LatentIG,
                                          std::uint64_t seed = 0);

 private:
  EvalReport sweep(AttributionMethod method, MetricKind metric, const std::vector<double>& ratios,
                   const std::vector<std::uint64_t>& seeds);
  void ensure_deterministic(AttributionMethod method);

  const CodecModel& codec_;
  const ClassifierModel& classifier_;
  std::vector<AudioClip> clips_;
  std::vector<int> labels_;
  EvalOptions options_;
  std::string dataset_;
  AudioClip noise_;
  LatentGrid base_;
  std::vector<LatentGrid> latents_;
  std::vector<int> predictions_;
  std::map<AttributionMethod, std::vector<AttributionMap>> cache_;
};

}  // namespace axg
