#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/audio.h"
#include "axg/classifier.h"
#include "axg/codec.h"

namespace axg {

enum class AttributionMethod { LatentIG, InputIG, RandomLatent, RandomInput };

std::string to_string(AttributionMethod method);
AttributionMethod method_from_string(const std::string& name);
bool is_latent_method(AttributionMethod method);
bool is_deterministic(AttributionMethod method);

// Relevance scores over a rows x cols grid: T x L for latent maps, 1 x N for input maps.
struct AttributionMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> scores;
  int target_class = -1;
  AttributionMethod method = AttributionMethod::LatentIG;
  std::size_t ig_steps = 0;
  std::string baseline;

  float at(std::size_t r, std::size_t c) const { return scores[r * cols + c]; }
  double total() const;

  nlohmann::json to_json() const;
  static AttributionMap from_json(const nlohmann::json& j);
};

// Scalar model output evaluated on a graph input.
using ScalarFunction = std::function<Var(Graph&, Var)>;

// (x - x') * (1/m) * sum_k dF/dx at x' + (k - 0.5)/m * (x - x'), k = 1..m.
std::vector<float> integrated_gradients(const Tensor& input, const Tensor& baseline, const ScalarFunction& f,
                                        std::size_t steps);

// F = pre-softmax logit of `target`.
AttributionMap integrated_gradients_latent(const LatentGrid& z, const LatentGrid& baseline,
                                           const ClassifierModel& classifier, int target, std::size_t steps);

// F = logit of `target` of Classifier(Encoder(x)), differentiated through the encoder.
AttributionMap integrated_gradients_input(const AudioClip& x, const AudioClip& baseline, const CodecModel& codec,
                                          const ClassifierModel& classifier, int target, std::size_t steps);

// I.i.d. uniform [0, 1) scores, a pure function of (shape, seed).
AttributionMap random_attribution(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                  AttributionMethod method = AttributionMethod::RandomLatent);

double target_logit(const LatentGrid& z, const ClassifierModel& classifier, int target);
double target_logit(const AudioClip& x, const CodecModel& codec, const ClassifierModel& classifier, int target);

}  // namespace axg
