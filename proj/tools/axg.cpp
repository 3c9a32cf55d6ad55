// Command-line driver for the explanation pipeline.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "axg/errors.h"
#include "axg/pipeline.h"

namespace fs = std::filesystem;

namespace {

std::vector<axg::TaskKind> tasks_for(const std::string& name) {
  if (name == "all") return {axg::TaskKind::Keyword, axg::TaskKind::Emotion};
  return {axg::task_from_string(name)};
}

void report(const axg::StageResult& r) {
  std::cout << r.summary;
  std::cout << "provenance: " << r.provenance.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space audio explanations: data, training, explanation and fidelity evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string config_path;
  std::vector<std::string> overrides;
  std::size_t jobs = 0;
  std::string data_dir, checkpoint_dir, report_dir;
  app.add_option("-c,--config", config_path, "JSON run configuration (defaults are used when omitted)");
  app.add_option("--set", overrides, "Override a config value, e.g. --set eval.runs=3 (repeatable)");
  app.add_option("--jobs", jobs, "Worker threads for evaluation (default 1)");
  app.add_option("--data-dir", data_dir, "Dataset directory (paths.data)");
  app.add_option("--checkpoints", checkpoint_dir, "Checkpoint directory (paths.checkpoints)");
  app.add_option("--reports", report_dir, "Report directory (paths.reports)");

  auto* synth = app.add_subcommand("synth-data", "Generate the keyword and emotion datasets");
  auto* train_codec = app.add_subcommand("train-codec", "Train the waveform autoencoder");

  std::string task = "all";
  auto* train_cls = app.add_subcommand("train-classifier", "Train latent classifiers on the frozen encoder");
  train_cls->add_option("--task", task, "keyword, emotion or all")->check(CLI::IsMember({"keyword", "emotion", "all"}));

  axg::ExplainRequest req;
  std::string explain_task = "keyword";
  bool remove = false;
  std::string input, out, reconstruction;
  auto* explain = app.add_subcommand("explain", "Explain one WAV clip and write the audio explanation");
  explain->add_option("--input", input, "Mono 16-bit PCM WAV to explain")->required();
  explain->add_option("--alpha", req.alpha, "Fraction of latent cells to keep (or remove with --remove)")
      ->required();
  explain->add_option("--out", out, "Output WAV path")->required();
  explain->add_option("--task", explain_task, "Classifier to explain")->check(CLI::IsMember({"keyword", "emotion"}));
  explain->add_flag("--remove", remove, "Remove the top cells instead of keeping them");
  explain->add_option("--reconstruction", reconstruction, "Also write the plain codec reconstruction here");

  std::string eval_task = "all";
  auto* fidelity = app.add_subcommand("eval-fidelity", "Explanation agreement over the keep-ratio grid");
  fidelity->add_option("--task", eval_task, "keyword, emotion or all")
      ->check(CLI::IsMember({"keyword", "emotion", "all"}));
  auto* drop = app.add_subcommand("eval-drop", "Post-removal accuracy over the removal-ratio grid");
  drop->add_option("--task", eval_task, "keyword, emotion or all")->check(CLI::IsMember({"keyword", "emotion", "all"}));
  std::string confusion_task = "emotion";
  auto* confusion = app.add_subcommand("confusion", "Confusion matrix after removing the top latent cells");
  confusion->add_option("--task", confusion_task, "keyword or emotion")
      ->check(CLI::IsMember({"keyword", "emotion"}));
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "usage"}, {"exit_code", 3}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }

  try {
    if (jobs > 0) overrides.push_back("eval.jobs=" + std::to_string(jobs));
    auto path_override = [&](const std::string& key, const std::string& value) {
      if (!value.empty()) overrides.push_back(key + "=" + nlohmann::json(fs::absolute(value).string()).dump());
    };
    path_override("paths.data", data_dir);
    path_override("paths.checkpoints", checkpoint_dir);
    path_override("paths.reports", report_dir);
    const axg::RunConfig config = axg::load_run_config(config_path, overrides);

    if (*show) {
      std::cout << config.to_json().dump(2) << '\n' << "hash: " << config.hash() << '\n';
    } else if (*synth) {
      report(axg::run_synth_data(config));
    } else if (*train_codec) {
      report(axg::run_train_codec(config, [&](std::size_t epoch, double loss) {
        std::cout << "epoch " << epoch + 1 << "/" << config.codec_train.epochs << " loss " << loss << std::endl;
      }));
    } else if (*train_cls) {
      for (auto t : tasks_for(task)) report(axg::run_train_classifier(config, t));
    } else if (*explain) {
      req.task = axg::task_from_string(explain_task);
      req.input = input;
      req.out = out;
      req.reconstruction = reconstruction;
      req.mode = remove ? axg::SelectionMode::RemoveTop : axg::SelectionMode::KeepTop;
      report(axg::run_explain(config, req));
    } else if (*fidelity) {
      for (auto t : tasks_for(eval_task)) report(axg::run_eval_fidelity(config, t));
    } else if (*drop) {
      for (auto t : tasks_for(eval_task)) report(axg::run_eval_drop(config, t));
    } else if (*confusion) {
      report(axg::run_confusion(config, axg::task_from_string(confusion_task)));
    }
  } catch (const std::exception& e) {
    std::cerr << axg::error_line(e) << '\n';
    return axg::exit_code_for(e);
  }
  return 0;
}
