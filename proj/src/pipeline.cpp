#include "axg/pipeline.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "axg/checkpoint.h"
#include "axg/errors.h"
#include "axg/hash.h"

namespace axg {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

namespace {

nlohmann::json tasks_to_json(const std::vector<TaskKind>& tasks) {
  nlohmann::json out = nlohmann::json::array();
  for (auto t : tasks) out.push_back(to_string(t));
  return out;
}

void strict_merge(nlohmann::json& base, const nlohmann::json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    nlohmann::json& slot = base[it.key()];
    if (slot.is_object()) {
      strict_merge(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json methods = nlohmann::json::array();
  for (auto m : eval.methods) methods.push_back(to_string(m));
  return {{"schema_version", kSchemaVersion},
          {"paths",
           {{"data", paths.data.string()}, {"checkpoints", paths.checkpoints.string()},
            {"reports", paths.reports.string()}}},
          {"seeds",
           {{"codec", seeds.codec}, {"classifier", seeds.classifier}, {"noise", seeds.noise},
            {"random", seeds.random}}},
          {"data", {{"keyword", keyword.to_json()}, {"emotion", emotion.to_json()}}},
          {"codec", codec.to_json()},
          {"codec_train", codec_train.to_json()},
          {"codec_tasks", tasks_to_json(codec_tasks)},
          {"classifier", classifier.to_json()},
          {"attribution",
           {{"ig_steps", ig_steps},
            {"noise_amplitude", noise_amplitude},
            {"ranking", to_string(selection.ranking)},
            {"granularity", to_string(selection.granularity)}}},
          {"eval",
           {{"runs", eval.runs},
            {"alphas", eval.alphas},
            {"betas", eval.betas},
            {"confusion_beta", eval.confusion_beta},
            {"methods", methods},
            {"jobs", eval.jobs}}}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + j.at("schema_version").dump());
  }
  nlohmann::json doc = RunConfig{}.to_json();
  strict_merge(doc, j, "");

  RunConfig c;
  try {
    const auto& p = doc.at("paths");
    c.paths.data = resolve(p.at("data").get<std::string>(), base_dir);
    c.paths.checkpoints = resolve(p.at("checkpoints").get<std::string>(), base_dir);
    c.paths.reports = resolve(p.at("reports").get<std::string>(), base_dir);
    const auto& s = doc.at("seeds");
    c.seeds.codec = s.at("codec").get<std::uint64_t>();
    c.seeds.classifier = s.at("classifier").get<std::uint64_t>();
    c.seeds.noise = s.at("noise").get<std::uint64_t>();
    c.seeds.random = s.at("random").get<std::uint64_t>();
    c.keyword = SyntheticDatasetSpec::from_json(doc.at("data").at("keyword"));
    c.emotion = SyntheticDatasetSpec::from_json(doc.at("data").at("emotion"));
    if (c.keyword.task != TaskKind::Keyword || c.emotion.task != TaskKind::Emotion) {
      throw ConfigError("config: data.keyword / data.emotion task fields do not match their keys");
    }
    c.codec = CodecConfig::from_json(doc.at("codec"));
    c.codec_train = CodecTrainConfig::from_json(doc.at("codec_train"));
    c.codec_tasks.clear();
    for (const auto& t : doc.at("codec_tasks")) c.codec_tasks.push_back(task_from_string(t.get<std::string>()));
    if (c.codec_tasks.empty()) throw ConfigError("config: codec_tasks is empty");
    c.classifier = ClassifierConfig::from_json(doc.at("classifier"));
    const auto& a = doc.at("attribution");
    c.ig_steps = a.at("ig_steps").get<std::size_t>();
    c.noise_amplitude = a.at("noise_amplitude").get<double>();
    c.selection.ranking = ranking_from_string(a.at("ranking").get<std::string>());
    c.selection.granularity = granularity_from_string(a.at("granularity").get<std::string>());
    const auto& e = doc.at("eval");
    c.eval.runs = e.at("runs").get<std::size_t>();
    c.eval.alphas = e.at("alphas").get<std::vector<double>>();
    c.eval.betas = e.at("betas").get<std::vector<double>>();
    c.eval.confusion_beta = e.at("confusion_beta").get<double>();
    c.eval.methods.clear();
    for (const auto& m : e.at("methods")) c.eval.methods.push_back(method_from_string(m.get<std::string>()));
    c.eval.jobs = e.at("jobs").get<std::size_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::logic_error& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }

  if (c.ig_steps == 0) throw ConfigError("config: attribution.ig_steps must be positive");
  if (!(c.noise_amplitude >= 0.0 && c.noise_amplitude <= 1.0)) {
    throw ConfigError("config: attribution.noise_amplitude must lie in [0, 1]");
  }
  if (c.eval.runs == 0) throw ConfigError("config: eval.runs must be positive");
  if (c.eval.jobs == 0) throw ConfigError("config: eval.jobs must be positive");
  for (double r : c.eval.alphas) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("config: eval.alphas must lie in [0, 1]");
  }
  for (double r : c.eval.betas) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("config: eval.betas must lie in [0, 1]");
  }
  if (!(c.eval.confusion_beta >= 0.0 && c.eval.confusion_beta <= 1.0)) {
    throw ConfigError("config: eval.confusion_beta must lie in [0, 1]");
  }
  if (c.classifier.epochs == 0 || c.classifier.batch_size == 0 || c.classifier.hidden == 0) {
    throw ConfigError("config: classifier hidden/epochs/batch_size must be positive");
  }
  if (c.codec_train.batch_size == 0) throw ConfigError("config: codec_train.batch_size must be positive");
  return c;
}

std::string RunConfig::hash() const {
  // Paths only say where artifacts go, not what they contain.
  nlohmann::json j = to_json();
  j.erase("paths");
  return sha256_hex(j.dump());
}

const SyntheticDatasetSpec& RunConfig::dataset_spec(TaskKind task) const {
  return task == TaskKind::Keyword ? keyword : emotion;
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.ig_steps = ig_steps;
  o.noise_seed = seeds.noise;
  o.noise_amplitude = noise_amplitude;
  o.selection = selection;
  o.random_seed = seeds.random;
  o.jobs = eval.jobs;
  return o;
}

void apply_overrides(nlohmann::json& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
    const std::string key = a.substr(0, eq);
    const std::string raw = a.substr(eq + 1);
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      value = raw;
    }
    nlohmann::json* node = &config;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->is_object()) throw ConfigError("override '" + key + "': '" + parts[i] + "' is not an object");
      node = &(*node)[parts[i]];
      if (node->is_null()) *node = nlohmann::json::object();
    }
    if (!node->is_object()) throw ConfigError("override '" + key + "' does not address an object member");
    (*node)[parts.back()] = value;
  }
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides) {
  nlohmann::json j;
  fs::path base;
  if (path.empty()) {
    j = {{"schema_version", RunConfig::kSchemaVersion}};
  } else {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path.string());
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + path.string() + ": " + e.what());
    }
    base = path.parent_path();
  }
  apply_overrides(j, overrides);
  return RunConfig::from_json(j, base);
}

fs::path codec_checkpoint_path(const RunConfig& config) { return config.paths.checkpoints / "codec.axg"; }

fs::path classifier_checkpoint_path(const RunConfig& config, TaskKind task) {
  return config.paths.checkpoints / ("classifier-" + to_string(task) + ".axg");
}

fs::path dataset_dir(const RunConfig& config, TaskKind task) { return config.paths.data / to_string(task); }

// ---------------------------------------------------------------------------
// Stage helpers

namespace {

struct Provenance {
  std::string stage;
  std::string task;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json artifacts = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();

  // Files are keyed relative to `root` so the record does not depend on where the run lives.
  void input(const fs::path& p, const fs::path& root) {
    inputs[fs::relative(p, root).generic_string()] = sha256_file(p);
  }
  void artifact(const fs::path& p, const fs::path& root) {
    artifacts[fs::relative(p, root).generic_string()] = sha256_file(p);
  }
};

fs::path write_provenance(const RunConfig& config, const Provenance& p, const fs::path& dir) {
  nlohmann::json j = {{"version", 1},
                      {"stage", p.stage},
                      {"config_hash", config.hash()},
                      {"config", config.to_json()},
                      {"seeds",
                       {{"codec", config.seeds.codec}, {"classifier", config.seeds.classifier},
                        {"noise", config.seeds.noise}, {"random", config.seeds.random}}},
                      {"inputs", p.inputs},
                      {"artifacts", p.artifacts}};
  j["config"].erase("paths");
  if (!p.task.empty()) j["task"] = p.task;
  if (!p.extra.empty()) j["details"] = p.extra;
  fs::create_directories(dir);
  const fs::path path = dir / ("provenance-" + p.stage + (p.task.empty() ? "" : "-" + p.task) + ".json");
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw FormatError("failed writing " + path.string());
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  f << text;
  if (!f) throw FormatError("failed writing " + path.string());
}

CodecModel load_codec(const RunConfig& config) {
  const fs::path p = codec_checkpoint_path(config);
  if (!fs::exists(p)) throw MissingCheckpointError("codec checkpoint not found: " + p.string());
  return CodecModel::from_checkpoint(read_checkpoint(p));
}

ClassifierModel load_classifier(const RunConfig& config, TaskKind task) {
  const fs::path p = classifier_checkpoint_path(config, task);
  if (!fs::exists(p)) throw MissingCheckpointError("classifier checkpoint not found: " + p.string());
  return ClassifierModel::from_checkpoint(read_checkpoint(p));
}

Dataset load_task_dataset(const RunConfig& config, TaskKind task) {
  const fs::path dir = dataset_dir(config, task);
  if (!fs::exists(dir / "manifest.json")) {
    throw FormatError("dataset not found in " + dir.string() + " (run synth-data first)");
  }
  Dataset d = load_dataset(dir);
  if (d.spec.to_json() != config.dataset_spec(task).to_json()) {
    throw FormatError("dataset in " + dir.string() + " was generated from a different spec");
  }
  return d;
}

LabeledLatentDataset encode_split(const Dataset& d, const std::vector<std::size_t>& indices,
                                  const CodecModel& codec) {
  LabeledLatentDataset out;
  out.class_count = d.class_names.size();
  out.class_names = d.class_names;
  for (auto i : indices) {
    out.latents.push_back(encode(d.clips[i].clip, codec));
    out.labels.push_back(d.clips[i].label);
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// One row per ratio, mean and std per method.
std::string table_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "ratio";
  for (const auto& r : reports) os << ',' << to_string(r.method) << "_mean," << to_string(r.method) << "_std";
  os << '\n';
  for (std::size_t k = 0; k < reports.front().rows.size(); ++k) {
    os << fmt("%g", reports.front().rows[k].ratio);
    for (const auto& r : reports) os << ',' << fmt("%.1f", r.rows[k].mean) << ',' << fmt("%.1f", r.rows[k].std);
    os << '\n';
  }
  return os.str();
}

std::string table_text(const std::string& title, const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << title << '\n';
  char cell[64];
  std::snprintf(cell, sizeof(cell), "%-6s", "ratio");
  os << cell;
  for (const auto& r : reports) {
    std::snprintf(cell, sizeof(cell), "%16s", to_string(r.method).c_str());
    os << cell;
  }
  os << '\n';
  for (std::size_t k = 0; k < reports.front().rows.size(); ++k) {
    std::snprintf(cell, sizeof(cell), "%-6g", reports.front().rows[k].ratio);
    os << cell;
    for (const auto& r : reports) {
      std::snprintf(cell, sizeof(cell), "%9.1f +- %3.1f", r.rows[k].mean, r.rows[k].std);
      os << cell;
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::uint64_t> run_seeds(const RunConfig& config) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < config.eval.runs; ++r) seeds.push_back(config.seeds.random + r);
  return seeds;
}

StageResult run_sweep(const RunConfig& config, TaskKind task, MetricKind metric) {
  const std::string stage = metric == MetricKind::Agreement ? "eval-fidelity" : "eval-drop";
  const std::string prefix = metric == MetricKind::Agreement ? "fidelity" : "drop";
  const CodecModel codec = load_codec(config);
  const ClassifierModel cls = load_classifier(config, task);
  const Dataset d = load_task_dataset(config, task);
  if (config.eval.methods.empty()) throw ConfigError("config: eval.methods is empty");

  Evaluator ev(codec, cls, d.clips_at(d.test_indices), d.labels_at(d.test_indices), config.eval_options(),
               to_string(task));
  const auto seeds = run_seeds(config);
  const auto& ratios = metric == MetricKind::Agreement ? config.eval.alphas : config.eval.betas;
  if (ratios.empty()) throw ConfigError("config: empty ratio grid for " + stage);

  const fs::path dir = config.paths.reports / to_string(task);
  StageResult res{stage, {}, {}, {}};
  Provenance prov{stage, to_string(task)};
  prov.input(codec_checkpoint_path(config), config.paths.checkpoints);
  prov.input(classifier_checkpoint_path(config, task), config.paths.checkpoints);
  prov.input(dataset_dir(config, task) / "manifest.json", config.paths.data);

  std::vector<EvalReport> reports;
  for (auto m : config.eval.methods) {
    EvalReport r = metric == MetricKind::Agreement ? ev.fidelity_agreement(m, ratios, seeds)
                                                   : ev.accuracy_drop(m, ratios, seeds);
    const fs::path json_path = dir / (prefix + "-" + to_string(m) + ".json");
    const fs::path csv_path = dir / (prefix + "-" + to_string(m) + ".csv");
    fs::create_directories(dir);
    write_report(r, json_path);
    write_report_csv(r, csv_path);
    res.artifacts.push_back(json_path);
    res.artifacts.push_back(csv_path);
    reports.push_back(std::move(r));
  }
  const fs::path table = dir / (prefix + "-table.csv");
  write_text(table, table_csv(reports));
  res.artifacts.push_back(table);
  for (const auto& a : res.artifacts) prov.artifact(a, config.paths.reports);
  prov.extra = {{"baseline_accuracy", ev.baseline_accuracy()}, {"samples", ev.size()}};
  res.provenance = write_provenance(config, prov, dir);

  const std::string title = (metric == MetricKind::Agreement ? "agreement (%) on " : "post-removal accuracy (%) on ") +
                            to_string(task) + " test set, " + std::to_string(ev.size()) + " samples, baseline " +
                            fmt("%.1f", ev.baseline_accuracy()) + "%";
  res.summary = table_text(title, reports);
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

StageResult run_synth_data(const RunConfig& config) {
  StageResult res{"synth-data", {}, {}, {}};
  Provenance prov{"synth-data", ""};
  std::ostringstream summary;
  for (TaskKind task : {TaskKind::Keyword, TaskKind::Emotion}) {
    const Dataset d = generate_dataset(config.dataset_spec(task));
    const fs::path dir = dataset_dir(config, task);
    save_dataset(d, dir);
    res.artifacts.push_back(dir / "manifest.json");
    prov.artifact(dir / "manifest.json", config.paths.data);
    for (std::size_t i = 0; i < d.clips.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "clip_%05zu.wav", i);
      prov.artifact(dir / name, config.paths.data);
    }
    summary << to_string(task) << ": " << d.clips.size() << " clips, " << d.class_names.size() << " classes, "
            << d.train_indices.size() << " train / " << d.test_indices.size() << " test -> " << dir.string()
            << '\n';
  }
  res.provenance = write_provenance(config, prov, config.paths.data);
  res.summary = summary.str();
  return res;
}

StageResult run_train_codec(const RunConfig& config, const EpochCallback& on_epoch) {
  StageResult res{"train-codec", {}, {}, {}};
  Provenance prov{"train-codec", ""};
  std::vector<AudioClip> clips;
  std::map<TaskKind, Dataset> data;
  for (TaskKind task : {TaskKind::Keyword, TaskKind::Emotion}) {
    const bool used = std::find(config.codec_tasks.begin(), config.codec_tasks.end(), task) !=
                      config.codec_tasks.end();
    if (!used && task != TaskKind::Keyword) continue;
    data.emplace(task, load_task_dataset(config, task));
    prov.input(dataset_dir(config, task) / "manifest.json", config.paths.data);
    if (used) {
      const auto& d = data.at(task);
      auto train = d.clips_at(d.train_indices);
      clips.insert(clips.end(), train.begin(), train.end());
    }
  }
  CodecModel codec = train_autoencoder(clips, config.codec, config.codec_train, config.seeds.codec, on_epoch);
  std::ostringstream summary;
  summary << "codec: " << clips.size() << " training clips, final loss "
          << fmt("%.6g", codec.metadata.at("final_loss").get<double>()) << '\n';
  nlohmann::json snr = nlohmann::json::object();
  for (const auto& [task, d] : data) {
    double total = 0.0;
    for (auto i : d.test_indices) total += reconstruction_snr(d.clips[i].clip, decode(encode(d.clips[i].clip, codec), codec));
    const double mean = total / static_cast<double>(d.test_indices.size());
    snr[to_string(task)] = mean;
    summary << "held-out SNR on " << to_string(task) << ": " << fmt("%.2f", mean) << " dB\n";
  }
  codec.metadata["heldout_snr_db"] = snr;
  codec.metadata["codec_tasks"] = tasks_to_json(config.codec_tasks);
  fs::create_directories(config.paths.checkpoints);
  const fs::path out = codec_checkpoint_path(config);
  write_checkpoint(codec.to_checkpoint(), out);
  res.artifacts.push_back(out);
  prov.artifact(out, config.paths.checkpoints);
  prov.extra = {{"heldout_snr_db", snr}};
  res.provenance = write_provenance(config, prov, config.paths.checkpoints);
  res.summary = summary.str();
  return res;
}

StageResult run_train_classifier(const RunConfig& config, TaskKind task) {
  StageResult res{"train-classifier", {}, {}, {}};
  Provenance prov{"train-classifier", to_string(task)};
  const CodecModel codec = load_codec(config);
  const Dataset d = load_task_dataset(config, task);
  prov.input(codec_checkpoint_path(config), config.paths.checkpoints);
  prov.input(dataset_dir(config, task) / "manifest.json", config.paths.data);

  const LabeledLatentDataset train = encode_split(d, d.train_indices, codec);
  const LabeledLatentDataset test = encode_split(d, d.test_indices, codec);
  ClassifierModel cls = train_classifier(train, config.classifier, config.seeds.classifier);
  const double acc = evaluate_accuracy(test, cls);
  cls.metadata["task"] = to_string(task);
  cls.metadata["test_accuracy"] = acc;
  cls.metadata["codec_sha256"] = sha256_file(codec_checkpoint_path(config));

  fs::create_directories(config.paths.checkpoints);
  const fs::path out = classifier_checkpoint_path(config, task);
  write_checkpoint(cls.to_checkpoint(), out);
  res.artifacts.push_back(out);
  prov.artifact(out, config.paths.checkpoints);
  prov.extra = {{"test_accuracy", acc}};
  res.provenance = write_provenance(config, prov, config.paths.checkpoints);
  res.summary = to_string(task) + " classifier: train accuracy " +
                fmt("%.1f", 100.0 * cls.metadata.at("train_accuracy").get<double>()) + "%, test accuracy " +
                fmt("%.1f", 100.0 * acc) + "% -> " + out.string() + "\n";
  return res;
}

StageResult run_explain(const RunConfig& config, const ExplainRequest& req) {
  if (!(req.alpha >= 0.0 && req.alpha <= 1.0)) throw ConfigError("explain: --alpha must lie in [0, 1]");
  if (req.out.empty()) throw ConfigError("explain: --out is required");
  const CodecModel codec = load_codec(config);
  const ClassifierModel cls = load_classifier(config, req.task);
  const AudioClip x = wav_read(req.input);

  const LatentGrid z = encode(x, codec);
  const int target = predict(z, cls);
  const LatentGrid base = make_base_latent(codec, x.size(), config.seeds.noise, config.noise_amplitude);
  const AttributionMap att = integrated_gradients_latent(z, base, cls, target, config.ig_steps);
  const SelectionMask mask = select_top(att, req.alpha, req.mode, config.selection);
  const LatentGrid zm = req.mode == SelectionMode::KeepTop ? apply_mask_keep(z, mask, base)
                                                           : apply_mask_remove(z, mask, base);
  const AudioClip explanation = synthesize_explanation(zm, codec);
  const int explained = predict(zm, cls);

  StageResult res{"explain", {}, {}, {}};
  Provenance prov{"explain", to_string(req.task)};
  const fs::path root = req.out.has_parent_path() ? req.out.parent_path() : fs::path(".");
  prov.input(codec_checkpoint_path(config), config.paths.checkpoints);
  prov.input(classifier_checkpoint_path(config, req.task), config.paths.checkpoints);
  prov.inputs["input.wav"] = sha256_file(req.input);
  if (!root.empty()) fs::create_directories(root);

  wav_write(explanation, req.out);
  res.artifacts.push_back(req.out);
  if (!req.reconstruction.empty()) {
    if (req.reconstruction.has_parent_path()) fs::create_directories(req.reconstruction.parent_path());
    wav_write(decode(z, codec), req.reconstruction);
    res.artifacts.push_back(req.reconstruction);
  }
  fs::path att_path = req.out;
  att_path.replace_extension(".attribution.json");
  nlohmann::json aj = {{"version", 1},
                       {"alpha", req.alpha},
                       {"mode", to_string(req.mode)},
                       {"target_class", target},
                       {"target_name", cls.class_names.at(static_cast<std::size_t>(target))},
                       {"explanation_prediction", explained},
                       {"explanation_prediction_name", cls.class_names.at(static_cast<std::size_t>(explained))},
                       {"selected_cells", mask.indices()},
                       {"attribution", att.to_json()}};
  write_text(att_path, aj.dump() + "\n");
  res.artifacts.push_back(att_path);
  for (const auto& a : res.artifacts) prov.artifact(a, fs::absolute(root));
  res.provenance = write_provenance(config, prov, root);
  res.summary = "prediction " + cls.class_names.at(static_cast<std::size_t>(target)) + ", explanation (" +
                to_string(req.mode) + " " + fmt("%g", req.alpha) + ", " + std::to_string(mask.count()) +
                " cells) classified " + cls.class_names.at(static_cast<std::size_t>(explained)) + " -> " +
                req.out.string() + "\n";
  return res;
}

StageResult run_eval_fidelity(const RunConfig& config, TaskKind task) {
  return run_sweep(config, task, MetricKind::Agreement);
}

StageResult run_eval_drop(const RunConfig& config, TaskKind task) {
  return run_sweep(config, task, MetricKind::PostRemovalAccuracy);
}

StageResult run_confusion(const RunConfig& config, TaskKind task) {
  const CodecModel codec = load_codec(config);
  const ClassifierModel cls = load_classifier(config, task);
  const Dataset d = load_task_dataset(config, task);
  Evaluator ev(codec, cls, d.clips_at(d.test_indices), d.labels_at(d.test_indices), config.eval_options(),
               to_string(task));
  const ConfusionMatrix cm = ev.confusion_after_removal(config.eval.confusion_beta, AttributionMethod::LatentIG,
                                                        config.seeds.random);
  nlohmann::json j = cm.to_json();
  j["neutral_class"] = d.neutral_class;
  if (d.neutral_class >= 0) {
    const int modal = cm.modal_prediction(d.neutral_class);
    j["modal_prediction_non_neutral"] = modal;
    j["modal_prediction_non_neutral_name"] = cm.class_names.at(static_cast<std::size_t>(modal));
  }

  const fs::path dir = config.paths.reports / to_string(task);
  const fs::path out = dir / "confusion.json";
  write_text(out, j.dump(2) + "\n");
  StageResult res{"confusion", {out}, {}, {}};
  Provenance prov{"confusion", to_string(task)};
  prov.input(codec_checkpoint_path(config), config.paths.checkpoints);
  prov.input(classifier_checkpoint_path(config, task), config.paths.checkpoints);
  prov.input(dataset_dir(config, task) / "manifest.json", config.paths.data);
  prov.artifact(out, config.paths.reports);
  res.provenance = write_provenance(config, prov, dir);

  std::ostringstream os;
  os << "confusion after removing top " << fmt("%g", cm.ratio) << " latent-IG cells (" << to_string(task)
     << ", rows = true class)\n";
  std::size_t width = 8;
  for (const auto& n : cm.class_names) width = std::max(width, n.size() + 1);
  os << std::string(width, ' ');
  for (const auto& n : cm.class_names) os << std::string(width - n.size(), ' ') << n;
  os << '\n';
  for (std::size_t r = 0; r < cm.counts.size(); ++r) {
    os << cm.class_names[r] << std::string(width - cm.class_names[r].size(), ' ');
    for (auto v : cm.counts[r]) {
      const std::string s = std::to_string(v);
      os << std::string(width - s.size(), ' ') << s;
    }
    os << '\n';
  }
  if (j.contains("modal_prediction_non_neutral_name")) {
    os << "modal prediction over non-neutral samples: "
       << j.at("modal_prediction_non_neutral_name").get<std::string>() << '\n';
  }
  res.summary = os.str();
  return res;
}

// ---------------------------------------------------------------------------
// Errors

namespace {

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const MissingCheckpointError*>(&e)) return "missing-checkpoint";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const LengthError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const IndexError*>(&e)) {
    return "data";
  }
  return "internal";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  const std::string kind = error_kind(e);
  if (kind == "missing-checkpoint") return 2;
  if (kind == "config") return 3;
  if (kind == "data") return 4;
  return 1;
}

std::string error_line(const std::exception& e) {
  return nlohmann::json{{"error", error_kind(e)}, {"exit_code", exit_code_for(e)}, {"message", e.what()}}.dump();
}

}  // namespace axg
