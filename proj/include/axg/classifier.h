#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/checkpoint.h"
#include "axg/codec.h"
#include "axg/optim.h"

namespace axg {

struct LabeledLatentDataset {
  std::vector<LatentGrid> latents;
  std::vector<int> labels;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;

  // Checks shared (T, L), label range and sizes; throws on violation.
  void validate() const;
};

struct ClassifierConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  AdamConfig adam{.learning_rate = 3e-3f};

  nlohmann::json to_json() const;
  static ClassifierConfig from_json(const nlohmann::json& j);
};

// Per frame Linear(L, hidden) -> ELU, mean-pool over frames, then Linear(hidden, C).
struct ClassifierModel {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::size_t hidden = 0;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;
  Tensor w1, b1, w2, b2;
  nlohmann::json metadata = nlohmann::json::object();

  std::vector<Tensor*> parameters();

  Checkpoint to_checkpoint() const;
  static ClassifierModel from_checkpoint(const Checkpoint& ckpt);
};

ClassifierModel zero_classifier(std::size_t frames, std::size_t channels, std::size_t hidden,
                                std::vector<std::string> class_names);
ClassifierModel init_classifier(std::size_t frames, std::size_t channels, std::size_t hidden,
                                std::vector<std::string> class_names, std::uint64_t seed);

// latent [T x L] -> logits [1 x C]
Var classifier_logits(Graph& g, const ClassifierModel& model, Var latent);

std::vector<float> logits(const LatentGrid& z, const ClassifierModel& model);
// Softmax probabilities; sums to 1.
std::vector<float> classify(const LatentGrid& z, const ClassifierModel& model);
int predict(const LatentGrid& z, const ClassifierModel& model);

// Cross-entropy with Adam on the latents only; the encoder that produced them is untouched.
ClassifierModel train_classifier(const LabeledLatentDataset& data, const ClassifierConfig& config,
                                 std::uint64_t seed);

double evaluate_accuracy(const LabeledLatentDataset& data, const ClassifierModel& model);

}  // namespace axg
