// Runs the full pipeline at default scale and checks each acceptance criterion.
// Prints one "criterion N ...: PASS|FAIL" line per criterion; exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "axg/audio.h"
#include "axg/checkpoint.h"
#include "axg/errors.h"
#include "axg/hash.h"
#include "axg/pipeline.h"
#include "gradcheck.h"

using namespace axg;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kGradTol = 1e-3;
constexpr double kGradSeconds = 60.0;
constexpr double kLinearTol = 1e-5;
constexpr double kCompletenessRel = 0.01;
constexpr double kCompletenessAbs = 1e-6;
constexpr double kConvergenceRel = 0.005;
constexpr std::size_t kIgSteps = 128;
constexpr std::size_t kCompletenessSamples = 50;
constexpr std::size_t kInputCompletenessSamples = 20;
constexpr double kMinSnrDb = 10.0;
constexpr double kMinAccuracy = 0.90;
constexpr double kTrainSeconds = 20.0 * 60.0;
const std::vector<double> kAgreementAlphas{0.1, 0.2, 0.4, 0.6, 0.8};
const std::vector<double> kRemovalBetas{0.01, 0.1, 0.2, 0.4};
const std::vector<double> kInputAlphas{0.1, 0.2};
constexpr double kConfusionBeta = 0.1;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  outcomes.push_back({id, name, pass, detail});
  std::cout << "criterion " << id << " " << name << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

void note(const std::string& s) { std::cout << "  " << s << std::endl; }

RunConfig config_in(const RunConfig& base, const fs::path& root) {
  RunConfig c = base;
  c.paths.data = root / "data";
  c.paths.checkpoints = root / "checkpoints";
  c.paths.reports = root / "reports";
  return c;
}

struct PipelineTimes {
  double synth = 0, codec = 0, classifiers = 0, eval = 0;
};

PipelineTimes run_pipeline(const RunConfig& c, bool verbose) {
  PipelineTimes t;
  auto stage = [&](const StageResult& r) {
    if (verbose) std::cout << r.summary;
  };
  auto t0 = Clock::now();
  stage(run_synth_data(c));
  t.synth = seconds_since(t0);
  t0 = Clock::now();
  stage(run_train_codec(c, [&](std::size_t e, double loss) {
    if (verbose && (e + 1) % 5 == 0) std::cout << "  codec epoch " << e + 1 << " loss " << loss << std::endl;
  }));
  t.codec = seconds_since(t0);
  t0 = Clock::now();
  stage(run_train_classifier(c, TaskKind::Keyword));
  stage(run_train_classifier(c, TaskKind::Emotion));
  t.classifiers = seconds_since(t0);
  t0 = Clock::now();
  for (auto task : {TaskKind::Keyword, TaskKind::Emotion}) {
    stage(run_eval_fidelity(c, task));
    stage(run_eval_drop(c, task));
  }
  stage(run_confusion(c, TaskKind::Emotion));
  t.eval = seconds_since(t0);
  return t;
}

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = sha256_file(e.path());
  }
  return out;
}

EvalReport load(const RunConfig& c, TaskKind task, const std::string& prefix, AttributionMethod m) {
  return read_report(c.paths.reports / to_string(task) / (prefix + "-" + to_string(m) + ".json"));
}

// ---------------------------------------------------------------------------

void criterion_gradcheck() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_op;
  std::size_t ops = 0;
  for (const auto& c : testutil::grad_cases()) {
    ++ops;
    for (int inst = 0; inst < testutil::kInstances; ++inst) {
      Rng rng(derive_seed(0xacc, static_cast<std::uint64_t>(inst)));
      const double err = testutil::gradcheck(c.make(rng), c.op, derive_seed(0xacd, static_cast<std::uint64_t>(inst)));
      if (err > worst) worst = err, worst_op = c.name;
    }
  }
  const double secs = seconds_since(t0);
  record(1, "autodiff gradcheck", worst < kGradTol && secs < kGradSeconds,
         std::to_string(ops) + " ops x " + std::to_string(testutil::kInstances) + " instances, worst error " +
             fmt("%.2e", worst) + " (" + worst_op + ") < " + fmt("%.0e", kGradTol) + ", " + fmt("%.1f", secs) +
             " s < 60 s");
}

struct Models {
  CodecModel codec;
  ClassifierModel keyword, emotion;
  Dataset keyword_data, emotion_data;
  const ClassifierModel& cls(TaskKind t) const { return t == TaskKind::Keyword ? keyword : emotion; }
  const Dataset& data(TaskKind t) const { return t == TaskKind::Keyword ? keyword_data : emotion_data; }
};

Models load_models(const RunConfig& c) {
  Models m;
  m.codec = CodecModel::from_checkpoint(read_checkpoint(codec_checkpoint_path(c)));
  m.keyword = ClassifierModel::from_checkpoint(read_checkpoint(classifier_checkpoint_path(c, TaskKind::Keyword)));
  m.emotion = ClassifierModel::from_checkpoint(read_checkpoint(classifier_checkpoint_path(c, TaskKind::Emotion)));
  m.keyword_data = load_dataset(dataset_dir(c, TaskKind::Keyword));
  m.emotion_data = load_dataset(dataset_dir(c, TaskKind::Emotion));
  return m;
}

void criterion_ig(const RunConfig& c, const Models& m) {
  // (a) affine closed forms.
  double linear_err = 0.0;
  {
    const Tensor w({1, 2}, {1.0f, 2.0f});
    const ScalarFunction f = [&](Graph& g, Var x) { return sum(mul(x, g.constant(w))); };
    for (std::size_t steps : {1u, 16u, 128u}) {
      const auto att = integrated_gradients(Tensor({1, 2}, {3.0f, 4.0f}), Tensor({1, 2}), f, steps);
      linear_err = std::max({linear_err, std::abs(att[0] - 3.0), std::abs(att[1] - 8.0)});
    }
    // A head whose ELU never leaves its identity region is affine in the latent grid.
    Rng rng(17);
    const std::size_t T = m.codec.config.frames_for(c.codec.clip_length), L = m.codec.config.latent_channels;
    ClassifierModel affine = zero_classifier(T, L, 4, {"a", "b"});
    affine.w1 = testutil::random_tensor({L, 4}, rng, -0.1, 0.1);
    affine.w2 = testutil::random_tensor({4, 2}, rng);
    for (auto& v : affine.b1.data) v = 100.0f;
    const auto& clip = m.keyword_data.clips[m.keyword_data.test_indices[0]].clip;
    const LatentGrid z = encode(clip, m.codec);
    const LatentGrid base = make_base_latent(m.codec, clip.size(), c.seeds.noise, c.noise_amplitude);
    const AttributionMap att = integrated_gradients_latent(z, base, affine, 1, 32);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t l = 0; l < L; ++l) {
        double w1w2 = 0.0;
        for (std::size_t h = 0; h < 4; ++h) w1w2 += affine.w1.data[l * 4 + h] * affine.w2.data[h * 2 + 1];
        const double expected = (z.at(t, l) - base.at(t, l)) * w1w2 / static_cast<double>(T);
        linear_err = std::max(linear_err, std::abs(att.at(t, l) - expected));
      }
    }
  }

  // (b) completeness and (c) convergence on trained models, target = predicted class.
  double worst_ratio = 0.0, worst_change = 0.0, worst_input_ratio = 0.0;
  std::size_t checked = 0, input_checked = 0;
  for (auto task : {TaskKind::Keyword, TaskKind::Emotion}) {
    const Dataset& d = m.data(task);
    const ClassifierModel& cls = m.cls(task);
    for (std::size_t k = 0; k < kCompletenessSamples && k < d.test_indices.size(); ++k) {
      const auto& clip = d.clips[d.test_indices[k]].clip;
      const LatentGrid z = encode(clip, m.codec);
      const LatentGrid base = make_base_latent(m.codec, clip.size(), c.seeds.noise, c.noise_amplitude);
      const int target = predict(z, cls);
      const double delta = target_logit(z, cls, target) - target_logit(base, cls, target);
      const double s128 = integrated_gradients_latent(z, base, cls, target, kIgSteps).total();
      const double s256 = integrated_gradients_latent(z, base, cls, target, 2 * kIgSteps).total();
      worst_ratio = std::max(worst_ratio, std::abs(s128 - delta) / (kCompletenessRel * std::abs(delta) + kCompletenessAbs));
      worst_change = std::max(worst_change, std::abs(s256 - s128) / std::max(std::abs(s128), 1e-12));
      ++checked;
    }
  }
  {
    const Dataset& d = m.keyword_data;
    for (std::size_t k = 0; k < kInputCompletenessSamples; ++k) {
      const auto& clip = d.clips[d.test_indices[k]].clip;
      const AudioClip noise = generate_noise_clip(clip.size(), c.noise_amplitude, c.seeds.noise, clip.sample_rate());
      const int target = predict(encode(clip, m.codec), m.keyword);
      const double delta =
          target_logit(clip, m.codec, m.keyword, target) - target_logit(noise, m.codec, m.keyword, target);
      const double s = integrated_gradients_input(clip, noise, m.codec, m.keyword, target, kIgSteps).total();
      worst_input_ratio =
          std::max(worst_input_ratio, std::abs(s - delta) / (kCompletenessRel * std::abs(delta) + kCompletenessAbs));
      ++input_checked;
    }
  }
  const bool pass = linear_err <= kLinearTol && worst_ratio <= 1.0 && worst_change < kConvergenceRel &&
                    worst_input_ratio <= 1.0;
  record(2, "IG correctness", pass,
         "affine max error " + fmt("%.1e", linear_err) + " <= 1e-5; latent completeness on " +
             std::to_string(checked) + " samples uses " + fmt("%.3f", worst_ratio) +
             " of the 1%+1e-6 budget (input-space, " + std::to_string(input_checked) + " samples: " +
             fmt("%.3f", worst_input_ratio) + "); m 128->256 max change " + fmt("%.4f", 100.0 * worst_change) +
             "% < 0.5%");
}

void criterion_training(const Models& m, const PipelineTimes& t) {
  double snr = 0.0;
  const auto& kd = m.keyword_data;
  for (auto i : kd.test_indices) {
    const auto& x = kd.clips[i].clip.samples();
    const auto y = decode(encode(kd.clips[i].clip, m.codec), m.codec).samples();
    double sig = 0.0, err = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sig += static_cast<double>(x[k]) * x[k];
      err += (static_cast<double>(x[k]) - y[k]) * (static_cast<double>(x[k]) - y[k]);
    }
    snr += 10.0 * std::log10(sig / err);
  }
  snr /= static_cast<double>(kd.test_indices.size());
  auto accuracy = [&](TaskKind task) {
    const Dataset& d = m.data(task);
    std::size_t ok = 0;
    for (auto i : d.test_indices) ok += predict(encode(d.clips[i].clip, m.codec), m.cls(task)) == d.clips[i].label;
    return static_cast<double>(ok) / static_cast<double>(d.test_indices.size());
  };
  const double kw = accuracy(TaskKind::Keyword), em = accuracy(TaskKind::Emotion);
  const double train = t.codec + t.classifiers;
  record(3, "training targets", snr >= kMinSnrDb && kw >= kMinAccuracy && em >= kMinAccuracy && train < kTrainSeconds,
         "keyword held-out SNR " + fmt("%.2f", snr) + " dB >= 10; test accuracy keyword " + fmt("%.1f", 100 * kw) +
             "%, emotion " + fmt("%.1f", 100 * em) + "% >= 90%; training " + fmt("%.0f", train) + " s (codec " +
             fmt("%.0f", t.codec) + ", classifiers " + fmt("%.0f", t.classifiers) + ") < 1200 s");
}

std::string row_text(const EvalReport& r) {
  std::string s;
  for (const auto& row : r.rows) s += " " + fmt("%g", row.ratio) + ":" + fmt("%.1f", row.mean) + "+-" + fmt("%.1f", row.std);
  return s;
}

void criterion_table1(const RunConfig& c) {
  bool pass = true;
  std::string detail;
  for (auto task : {TaskKind::Keyword, TaskKind::Emotion}) {
    const EvalReport ig = load(c, task, "fidelity", AttributionMethod::LatentIG);
    const EvalReport rnd = load(c, task, "fidelity", AttributionMethod::RandomLatent);
    note(to_string(task) + " agreement latent-ig    " + row_text(ig));
    note(to_string(task) + " agreement random-latent" + row_text(rnd));
    bool above = true, zero_std = ig.runs == 5 && rnd.runs == 5;
    for (double a : kAgreementAlphas) {
      above &= ig.row(a).mean > rnd.row(a).mean;
      zero_std &= ig.row(a).std == 0.0;
    }
    const bool monotone = ig.row(0.8).mean >= ig.row(0.1).mean;
    pass &= above && zero_std && monotone;
    detail += to_string(task) + ": latent-ig > random at all alphas " + (above ? "yes" : "NO") + ", std 0 over 5 runs " +
              (zero_std ? "yes" : "NO") + ", a=0.8 (" + fmt("%.1f", ig.row(0.8).mean) + ") >= a=0.1 (" +
              fmt("%.1f", ig.row(0.1).mean) + ") " + (monotone ? "yes" : "NO") + "; ";
  }
  record(4, "agreement trend", pass, detail);
}

void criterion_table2(const RunConfig& c, const Models& m) {
  bool pass = true;
  std::string detail;
  for (auto task : {TaskKind::Keyword, TaskKind::Emotion}) {
    const EvalReport ig = load(c, task, "drop", AttributionMethod::LatentIG);
    const EvalReport rnd = load(c, task, "drop", AttributionMethod::RandomLatent);
    note(to_string(task) + " post-removal latent-ig    " + row_text(ig));
    note(to_string(task) + " post-removal random-latent" + row_text(rnd));
    bool below = true;
    for (double b : kRemovalBetas) below &= ig.row(b).mean < rnd.row(b).mean;

    const Dataset& d = m.data(task);
    Evaluator ev(m.codec, m.cls(task), d.clips_at(d.test_indices), d.labels_at(d.test_indices), c.eval_options(),
                 to_string(task));
    bool exact = true;
    for (auto method : {AttributionMethod::LatentIG, AttributionMethod::RandomLatent}) {
      exact &= ev.accuracy_drop(method, {0.0}, ev.default_seeds(c.eval.runs)).rows[0].mean == ev.baseline_accuracy();
    }
    pass &= below && exact;
    detail += to_string(task) + ": latent-ig < random at all betas " + (below ? "yes" : "NO") +
              ", beta=0 equals baseline " + fmt("%.1f", ev.baseline_accuracy()) + "% exactly " +
              (exact ? "yes" : "NO") + "; ";
  }
  record(5, "post-removal trend", pass, detail);
}

void criterion_input_space(const RunConfig& c) {
  const EvalReport lat = load(c, TaskKind::Keyword, "fidelity", AttributionMethod::LatentIG);
  const EvalReport inp = load(c, TaskKind::Keyword, "fidelity", AttributionMethod::InputIG);
  note("keyword agreement input-ig     " + row_text(inp));
  bool pass = true;
  std::string flagged;
  for (const auto& row : lat.rows) {
    const bool ok = row.mean >= inp.row(row.ratio).mean;
    const bool hard = std::find(kInputAlphas.begin(), kInputAlphas.end(), row.ratio) != kInputAlphas.end();
    if (hard) pass &= ok;
    if (!ok && !hard) flagged += " " + fmt("%g", row.ratio);
  }
  record(6, "latent-IG vs input-space IG", pass,
         "keyword a=0.1: " + fmt("%.1f", lat.row(0.1).mean) + " vs " + fmt("%.1f", inp.row(0.1).mean) +
             ", a=0.2: " + fmt("%.1f", lat.row(0.2).mean) + " vs " + fmt("%.1f", inp.row(0.2).mean) +
             "; other alphas where input-ig is ahead (flagged, not failed):" + (flagged.empty() ? " none" : flagged));
}

void criterion_confusion(const RunConfig& c) {
  std::ifstream f(c.paths.reports / "emotion" / "confusion.json");
  const auto j = nlohmann::json::parse(f);
  ConfusionMatrix cm;
  cm.class_names = j.at("class_names").get<std::vector<std::string>>();
  cm.counts = j.at("counts").get<std::vector<std::vector<std::size_t>>>();
  const int neutral = j.at("neutral_class").get<int>();
  const int modal = cm.modal_prediction(neutral);
  std::size_t to_neutral = 0, total = 0;
  for (std::size_t r = 0; r < cm.counts.size(); ++r) {
    if (static_cast<int>(r) == neutral) continue;
    to_neutral += cm.counts[r][static_cast<std::size_t>(neutral)];
    total += cm.row_sum(r);
  }
  record(7, "emotion removal confusion",
         modal == neutral && j.at("ratio").get<double>() == kConfusionBeta,
         "beta=" + fmt("%g", j.at("ratio").get<double>()) + ", modal prediction over non-neutral samples '" +
             cm.class_names.at(static_cast<std::size_t>(modal)) + "' (" + std::to_string(to_neutral) + "/" +
             std::to_string(total) + " classified neutral)");
}

void criterion_exactness(const RunConfig& c, const Models& m, const fs::path& scratch) {
  std::string detail;
  bool pass = true;

  // alpha = 1 explanation vs plain reconstruction, through the explain stage.
  fs::create_directories(scratch);
  const auto& clip = m.keyword_data.clips[m.keyword_data.test_indices[3]].clip;
  wav_write(clip, scratch / "input.wav");
  ExplainRequest req;
  req.input = scratch / "input.wav";
  req.alpha = 1.0;
  req.out = scratch / "alpha1.wav";
  req.reconstruction = scratch / "reconstruction.wav";
  run_explain(c, req);
  const bool identity = sha256_file(req.out) == sha256_file(req.reconstruction);
  pass &= identity;
  detail += std::string("alpha=1 WAV == reconstruction WAV ") + (identity ? "yes" : "NO");

  // Duality and containment over random maps and grids.
  std::size_t duality_fail = 0, containment_fail = 0, trials = 0;
  const std::size_t T = 256, L = 32;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(0xd0a1, seed));
    LatentGrid z(T, L), base(T, L);
    for (auto& v : z.values) v = static_cast<float>(rng.uniform(-3, 3));
    for (auto& v : base.values) v = static_cast<float>(rng.uniform(-3, 3));
    AttributionMap att = random_attribution(T, L, seed);
    if (seed % 2) {
      for (auto& v : att.scores) v = std::floor(v * 8.0f);  // heavy ties
    }
    SelectionMask prev = select_top(att, 0.0);
    for (double r = 0.0; r <= 1.0 + 1e-9; r += 0.05) {
      const SelectionMask mask = select_top(att, std::min(r, 1.0), SelectionMode::RemoveTop);
      duality_fail += !(apply_mask_remove(z, mask, base) == apply_mask_keep(z, mask.complement(), base));
      for (auto i : prev.indices()) containment_fail += !mask.selected[i];
      prev = mask;
      ++trials;
    }
  }
  pass &= duality_fail == 0 && containment_fail == 0;
  detail += "; duality " + std::to_string(trials - duality_fail) + "/" + std::to_string(trials) +
            ", containment violations " + std::to_string(containment_fail);

  // WAV round trip on every stored keyword clip vs the in-memory generator.
  const Dataset fresh = generate_dataset(c.keyword);
  double wav_err = 0.0;
  for (std::size_t i = 0; i < fresh.clips.size(); ++i) {
    const auto& a = fresh.clips[i].clip.samples();
    const auto& b = m.keyword_data.clips[i].clip.samples();
    for (std::size_t k = 0; k < a.size(); ++k) wav_err = std::max(wav_err, std::abs(static_cast<double>(a[k]) - b[k]));
  }
  const bool wav_ok = wav_err <= 1.0 / 32767.0;
  pass &= wav_ok;
  detail += "; WAV max error " + fmt("%.2e", wav_err) + " <= 1/32767";

  // Checkpoints: parse + serialize reproduces the file bytes.
  bool ckpt_ok = true;
  for (const fs::path& p : {codec_checkpoint_path(c), classifier_checkpoint_path(c, TaskKind::Keyword),
                            classifier_checkpoint_path(c, TaskKind::Emotion)}) {
    std::ifstream f(p, std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    ckpt_ok &= serialize_checkpoint(parse_checkpoint(bytes)) == bytes;
  }
  const Checkpoint again = m.codec.to_checkpoint();
  ckpt_ok &= sha256_hex(serialize_checkpoint(again)) == sha256_file(codec_checkpoint_path(c));
  pass &= ckpt_ok;
  detail += std::string("; checkpoint round-trip bit-exact ") + (ckpt_ok ? "yes" : "NO");
  record(8, "exactness suite", pass, detail);
}

void criterion_determinism(const RunConfig& a, const RunConfig& b) {
  std::size_t files = 0, differ = 0;
  std::string first;
  for (auto pick : {&RunPaths::data, &RunPaths::checkpoints, &RunPaths::reports}) {
    const auto ha = tree_hashes(a.paths.*pick), hb = tree_hashes(b.paths.*pick);
    files += ha.size();
    for (const auto& [name, h] : ha) {
      auto it = hb.find(name);
      if (it == hb.end() || it->second != h) {
        ++differ;
        if (first.empty()) first = name;
      }
    }
    differ += hb.size() > ha.size() ? hb.size() - ha.size() : 0;
  }
  record(9, "determinism", differ == 0 && files > 0,
         "two full runs, " + std::to_string(files) + " files (WAVs, checkpoints, reports, provenance), " +
             std::to_string(differ) + " differ" + (first.empty() ? "" : " (first: " + first + ")"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run: trains everything at default scale and checks each criterion"};
  std::string workdir = "acceptance_run";
  std::string config_path;
  std::size_t jobs = 1;
  bool skip_determinism = false;
  app.add_option("--workdir", workdir, "Scratch directory for both pipeline runs");
  app.add_option("--config", config_path, "Run configuration (defaults when omitted)");
  app.add_option("--jobs", jobs, "Evaluation worker threads");
  app.add_flag("--skip-determinism", skip_determinism, "Do not run the second pipeline (criterion 9 reported FAIL)");
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path root = fs::absolute(workdir);
    fs::remove_all(root);
    RunConfig base = load_run_config(config_path, {"eval.jobs=" + std::to_string(jobs)});
    const RunConfig first = config_in(base, root / "run1");
    const RunConfig second = config_in(base, root / "run2");
    std::cout << "config hash " << base.hash() << "\nworkdir " << root.string() << std::endl;

    criterion_gradcheck();

    const auto t0 = Clock::now();
    const PipelineTimes times = run_pipeline(first, true);
    std::cout << "pipeline: data " << fmt("%.0f", times.synth) << " s, codec " << fmt("%.0f", times.codec)
              << " s, classifiers " << fmt("%.0f", times.classifiers) << " s, evaluation " << fmt("%.0f", times.eval)
              << " s (total " << fmt("%.0f", seconds_since(t0)) << " s)" << std::endl;
    const Models models = load_models(first);

    criterion_ig(first, models);
    criterion_training(models, times);
    criterion_table1(first);
    criterion_table2(first, models);
    criterion_input_space(first);
    criterion_confusion(first);
    criterion_exactness(first, models, root / "explain");
    if (skip_determinism) {
      record(9, "determinism", false, "skipped (--skip-determinism)");
    } else {
      run_pipeline(second, false);
      criterion_determinism(first, second);
    }
  } catch (const std::exception& e) {
    std::cerr << error_line(e) << std::endl;
    return 1;
  }

  std::size_t passed = 0;
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& o : outcomes) {
    passed += o.pass;
    summary.push_back({{"criterion", o.id}, {"name", o.name}, {"pass", o.pass}, {"detail", o.detail}});
  }
  std::ofstream(fs::absolute(workdir) / "acceptance.json") << summary.dump(2) << '\n';
  std::cout << passed << "/" << outcomes.size() << " criteria passed" << std::endl;
  return passed == outcomes.size() && outcomes.size() == 9 ? 0 : 1;
}
