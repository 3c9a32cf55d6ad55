#include "axg/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "axg/errors.h"
#include "axg/parallel.h"
#include "axg/random.h"

namespace axg {

std::string to_string(MetricKind kind) {
  return kind == MetricKind::Agreement ? "agreement" : "post-removal-accuracy";
}

namespace {

MetricKind metric_from_string(const std::string& name) {
  if (name == "agreement") return MetricKind::Agreement;
  if (name == "post-removal-accuracy") return MetricKind::PostRemovalAccuracy;
  throw ParseError("unknown metric kind '" + name + "'");
}

}  // namespace

const ReportRow& EvalReport::row(double ratio) const {
  for (const auto& r : rows) {
    if (std::abs(r.ratio - ratio) < 1e-12) return r;
  }
  throw IndexError("report has no row for ratio " + std::to_string(ratio));
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"ratio", r.ratio}, {"mean", r.mean}, {"std", r.std}, {"per_run", r.per_run}});
  }
  return {{"version", EvalReport::kVersion},
          {"dataset", report.dataset},
          {"method", to_string(report.method)},
          {"metric", to_string(report.metric)},
          {"rows", rows},
          {"runs", report.runs},
          {"seeds", report.seeds},
          {"config", report.config}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    const int version = j.at("version").get<int>();
    if (version != EvalReport::kVersion) throw ParseError("report: unsupported version " + std::to_string(version));
    r.dataset = j.at("dataset").get<std::string>();
    try {
      r.method = method_from_string(j.at("method").get<std::string>());
    } catch (const ContractError& e) {
      throw ParseError(std::string("report: ") + e.what());
    }
    r.metric = metric_from_string(j.at("metric").get<std::string>());
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("ratio").get<double>(), row.at("mean").get<double>(), row.at("std").get<double>(),
                        row.at("per_run").get<std::vector<double>>()});
    }
    r.runs = j.at("runs").get<std::size_t>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open " + path.string() + " for writing");
  f << report_to_json(report).dump(2) << '\n';
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open report " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("report " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "ratio,mean,std\n";
  char line[96];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof(line), "%g,%.1f,%.1f\n", r.ratio, r.mean, r.std);
    os << line;
  }
  return os.str();
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open " + path.string() + " for writing");
  f << report_csv(report);
}

std::size_t ConfusionMatrix::row_sum(std::size_t r) const {
  std::size_t s = 0;
  for (auto v : counts.at(r)) s += v;
  return s;
}

int ConfusionMatrix::modal_prediction(int excluded) const {
  if (counts.empty()) throw ContractError("modal_prediction: empty confusion matrix");
  std::vector<std::size_t> col(counts.size(), 0);
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (static_cast<int>(r) == excluded) continue;
    for (std::size_t c = 0; c < counts[r].size(); ++c) col[c] += counts[r][c];
  }
  return static_cast<int>(std::max_element(col.begin(), col.end()) - col.begin());
}

nlohmann::json ConfusionMatrix::to_json() const {
  return {{"version", 1},
          {"class_names", class_names},
          {"counts", counts},
          {"ratio", ratio},
          {"method", to_string(method)}};
}

nlohmann::json EvalOptions::to_json() const {
  return {{"ig_steps", ig_steps},
          {"noise_seed", noise_seed},
          {"noise_amplitude", noise_amplitude},
          {"ranking", to_string(selection.ranking)},
          {"granularity", to_string(selection.granularity)},
          {"random_seed", random_seed}};
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const CodecModel& codec, const ClassifierModel& classifier, std::vector<AudioClip> clips,
                     std::vector<int> labels, EvalOptions options, std::string dataset_id)
    : codec_(codec),
      classifier_(classifier),
      clips_(std::move(clips)),
      labels_(std::move(labels)),
      options_(std::move(options)),
      dataset_(std::move(dataset_id)) {
  if (clips_.empty()) throw ContractError("evaluation test set is empty");
  if (clips_.size() != labels_.size()) throw ContractError("evaluation: clips and labels differ in count");
  for (const auto& c : clips_) {
    if (c.size() != clips_.front().size()) throw ContractError("evaluation: clips differ in length");
  }
  noise_ = generate_noise_clip(clips_.front().size(), options_.noise_amplitude, options_.noise_seed,
                               codec_.config.sample_rate);
  base_ = encode(noise_, codec_);
  latents_.resize(clips_.size());
  predictions_.resize(clips_.size());
  parallel_for(clips_.size(), options_.jobs, [&](std::size_t i) {
    latents_[i] = encode(clips_[i], codec_);
    predictions_[i] = predict(latents_[i], classifier_);
  });
}

double Evaluator::baseline_accuracy() const {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < size(); ++i) hit += predictions_[i] == labels_[i];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(size());
}

std::vector<std::uint64_t> Evaluator::default_seeds(std::size_t runs) const {
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < runs; ++r) seeds.push_back(options_.random_seed + r);
  return seeds;
}

void Evaluator::ensure_deterministic(AttributionMethod method) {
  if (!is_deterministic(method) || cache_.count(method)) return;
  std::vector<AttributionMap> maps(size());
  parallel_for(size(), options_.jobs, [&](std::size_t i) {
    maps[i] = method == AttributionMethod::LatentIG
                  ? integrated_gradients_latent(latents_[i], base_, classifier_, predictions_[i], options_.ig_steps)
                  : integrated_gradients_input(clips_[i], noise_, codec_, classifier_, predictions_[i],
                                               options_.ig_steps);
  });
  cache_.emplace(method, std::move(maps));
}

AttributionMap Evaluator::attribution(AttributionMethod method, std::size_t sample, std::uint64_t run_seed) {
  if (sample >= size()) throw IndexError("sample index out of range");
  if (is_deterministic(method)) {
    ensure_deterministic(method);
    return cache_.at(method)[sample];
  }
  const std::uint64_t seed = derive_seed(run_seed, sample);
  AttributionMap m = method == AttributionMethod::RandomLatent
                         ? random_attribution(latents_[sample].frames, latents_[sample].channels, seed, method)
                         : random_attribution(1, clips_[sample].size(), seed, method);
  m.target_class = predictions_[sample];
  return m;
}

namespace {

int masked_prediction_with(const AttributionMap& att, AttributionMethod method, const AudioClip& clip,
                           const LatentGrid& z, const LatentGrid& base, const AudioClip& noise,
                           const CodecModel& codec, const ClassifierModel& classifier, double ratio,
                           SelectionMode mode, const SelectionOptions& selection) {
  if (is_latent_method(method)) {
    const SelectionMask mask = select_top(att, ratio, mode, selection);
    const LatentGrid masked =
        mode == SelectionMode::KeepTop ? apply_mask_keep(z, mask, base) : apply_mask_remove(z, mask, base);
    return predict(masked, classifier);
  }
  const AudioClip masked = mask_input_space(clip, att, ratio, noise, mode, selection);
  return predict(encode(masked, codec), classifier);
}

double population_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

int Evaluator::masked_prediction(AttributionMethod method, std::size_t sample, double ratio, SelectionMode mode,
                                 std::uint64_t run_seed) {
  const AttributionMap att = attribution(method, sample, run_seed);
  return masked_prediction_with(att, method, clips_[sample], latents_[sample], base_, noise_, codec_, classifier_,
                                ratio, mode, options_.selection);
}

EvalReport Evaluator::sweep(AttributionMethod method, MetricKind metric, const std::vector<double>& ratios,
                            const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ContractError("evaluation needs at least one run");
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ContractError("evaluation ratios must lie in [0, 1]");
  }
  ensure_deterministic(method);
  const SelectionMode mode = metric == MetricKind::Agreement ? SelectionMode::KeepTop : SelectionMode::RemoveTop;

  std::vector<std::vector<double>> per_ratio(ratios.size());
  for (std::uint64_t seed : seeds) {
    // hits[sample][ratio]
    std::vector<std::vector<std::uint8_t>> hits(size(), std::vector<std::uint8_t>(ratios.size(), 0));
    parallel_for(size(), options_.jobs, [&](std::size_t i) {
      const AttributionMap att = attribution(method, i, seed);
      const int reference = metric == MetricKind::Agreement ? predictions_[i] : labels_[i];
      for (std::size_t k = 0; k < ratios.size(); ++k) {
        const int p = masked_prediction_with(att, method, clips_[i], latents_[i], base_, noise_, codec_,
                                             classifier_, ratios[k], mode, options_.selection);
        hits[i][k] = p == reference;
      }
    });
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < size(); ++i) count += hits[i][k];
      per_ratio[k].push_back(100.0 * static_cast<double>(count) / static_cast<double>(size()));
    }
  }

  EvalReport report;
  report.dataset = dataset_;
  report.method = method;
  report.metric = metric;
  report.runs = seeds.size();
  report.seeds = seeds;
  report.config = options_.to_json();
  report.config["samples"] = size();
  report.config["baseline_accuracy"] = baseline_accuracy();
  report.config["selection_mode"] = to_string(mode);
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    double mean = 0.0;
    for (double v : per_ratio[k]) mean += v;
    mean /= static_cast<double>(per_ratio[k].size());
    report.rows.push_back({ratios[k], mean, population_std(per_ratio[k]), per_ratio[k]});
  }
  return report;
}

EvalReport Evaluator::fidelity_agreement(AttributionMethod method, const std::vector<double>& ratios,
                                         const std::vector<std::uint64_t>& seeds) {
  return sweep(method, MetricKind::Agreement, ratios, seeds);
}

EvalReport Evaluator::accuracy_drop(AttributionMethod method, const std::vector<double>& ratios,
                                    const std::vector<std::uint64_t>& seeds) {
  return sweep(method, MetricKind::PostRemovalAccuracy, ratios, seeds);
}

ConfusionMatrix Evaluator::confusion_after_removal(double ratio, AttributionMethod method, std::uint64_t seed) {
  ensure_deterministic(method);
  ConfusionMatrix cm;
  cm.class_names = classifier_.class_names;
  cm.ratio = ratio;
  cm.method = method;
  cm.counts.assign(classifier_.class_count, std::vector<std::size_t>(classifier_.class_count, 0));
  std::vector<int> predicted(size());
  parallel_for(size(), options_.jobs, [&](std::size_t i) {
    predicted[i] = masked_prediction(method, i, ratio, SelectionMode::RemoveTop, seed);
  });
  for (std::size_t i = 0; i < size(); ++i) {
    cm.counts.at(static_cast<std::size_t>(labels_[i])).at(static_cast<std::size_t>(predicted[i])) += 1;
  }
  return cm;
}

}  // namespace axg
