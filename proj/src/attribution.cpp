#include "axg/attribution.h"

#include <cmath>

#include "axg/errors.h"
#include "axg/random.h"

namespace axg {

std::string to_string(AttributionMethod method) {
  switch (method) {
    case AttributionMethod::LatentIG: return "latent-ig";
    case AttributionMethod::InputIG: return "input-ig";
    case AttributionMethod::RandomLatent: return "random-latent";
    case AttributionMethod::RandomInput: return "random-input";
  }
  return "unknown";
}

AttributionMethod method_from_string(const std::string& name) {
  for (auto m : {AttributionMethod::LatentIG, AttributionMethod::InputIG, AttributionMethod::RandomLatent,
                 AttributionMethod::RandomInput}) {
    if (to_string(m) == name) return m;
  }
  throw ContractError("unknown attribution method '" + name + "'");
}

bool is_latent_method(AttributionMethod method) {
  return method == AttributionMethod::LatentIG || method == AttributionMethod::RandomLatent;
}

bool is_deterministic(AttributionMethod method) {
  return method == AttributionMethod::LatentIG || method == AttributionMethod::InputIG;
}

double AttributionMap::total() const {
  double s = 0.0;
  for (float v : scores) s += v;
  return s;
}

nlohmann::json AttributionMap::to_json() const {
  return {{"rows", rows},          {"cols", cols},         {"scores", scores},  {"target_class", target_class},
          {"method", to_string(method)}, {"ig_steps", ig_steps}, {"baseline", baseline}};
}

AttributionMap AttributionMap::from_json(const nlohmann::json& j) {
  AttributionMap m;
  try {
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.scores = j.at("scores").get<std::vector<float>>();
    m.target_class = j.at("target_class").get<int>();
    m.method = method_from_string(j.at("method").get<std::string>());
    m.ig_steps = j.at("ig_steps").get<std::size_t>();
    m.baseline = j.at("baseline").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("attribution map: ") + e.what());
  }
  if (m.scores.size() != m.rows * m.cols) throw ParseError("attribution map: score count does not match shape");
  return m;
}

std::vector<float> integrated_gradients(const Tensor& input, const Tensor& baseline, const ScalarFunction& f,
                                        std::size_t steps) {
  if (input.shape != baseline.shape) {
    throw DimensionError("integrated gradients: input " + shape_str(input.shape) + " vs baseline " +
                         shape_str(baseline.shape));
  }
  if (steps == 0) throw ContractError("integrated gradients needs at least one step");
  const std::size_t n = input.numel();
  std::vector<float> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = input.data[i] - baseline.data[i];

  std::vector<double> grad_sum(n, 0.0);
  Tensor point(input.shape);
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto alpha = static_cast<float>((static_cast<double>(k) - 0.5) / static_cast<double>(steps));
    for (std::size_t i = 0; i < n; ++i) point.data[i] = baseline.data[i] + alpha * delta[i];
    Graph g;
    Var x = g.leaf(point, true);
    Var out = f(g, x);
    g.backward(out);
    const auto& gx = x.grad();
    for (std::size_t i = 0; i < n; ++i) grad_sum[i] += gx[i];
  }
  std::vector<float> att(n);
  for (std::size_t i = 0; i < n; ++i) {
    att[i] = static_cast<float>(static_cast<double>(delta[i]) * grad_sum[i] / static_cast<double>(steps));
  }
  return att;
}

namespace {

void check_target(const ClassifierModel& classifier, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= classifier.class_count) {
    throw IndexError("target class " + std::to_string(target) + " out of range");
  }
}

}  // namespace

AttributionMap integrated_gradients_latent(const LatentGrid& z, const LatentGrid& baseline,
                                           const ClassifierModel& classifier, int target, std::size_t steps) {
  check_target(classifier, target);
  if (z.frames != baseline.frames || z.channels != baseline.channels) {
    throw DimensionError("latent IG: input and baseline grids differ in shape");
  }
  const auto t = static_cast<std::size_t>(target);
  ScalarFunction f = [&](Graph& g, Var x) { return pick(classifier_logits(g, classifier, x), t); };
  AttributionMap m;
  m.rows = z.frames;
  m.cols = z.channels;
  m.scores = integrated_gradients(z.to_tensor(), baseline.to_tensor(), f, steps);
  m.target_class = target;
  m.method = AttributionMethod::LatentIG;
  m.ig_steps = steps;
  m.baseline = "encoded-noise";
  return m;
}

AttributionMap integrated_gradients_input(const AudioClip& x, const AudioClip& baseline, const CodecModel& codec,
                                          const ClassifierModel& classifier, int target, std::size_t steps) {
  check_target(classifier, target);
  if (x.size() != baseline.size()) {
    throw DimensionError("input IG: clip of " + std::to_string(x.size()) + " samples vs baseline of " +
                         std::to_string(baseline.size()));
  }
  const auto t = static_cast<std::size_t>(target);
  ScalarFunction f = [&](Graph& g, Var wave) {
    return pick(classifier_logits(g, classifier, encoder_forward(g, codec, wave)), t);
  };
  AttributionMap m;
  m.rows = 1;
  m.cols = x.size();
  m.scores = integrated_gradients(Tensor({1, x.size()}, x.samples()), Tensor({1, x.size()}, baseline.samples()),
                                  f, steps);
  m.target_class = target;
  m.method = AttributionMethod::InputIG;
  m.ig_steps = steps;
  m.baseline = "noise-clip";
  return m;
}

AttributionMap random_attribution(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                  AttributionMethod method) {
  if (rows == 0 || cols == 0) throw DimensionError("random attribution: empty shape");
  AttributionMap m;
  m.rows = rows;
  m.cols = cols;
  m.scores.resize(rows * cols);
  Rng rng(seed);
  // 24-bit draws so the float never rounds up to 1.
  for (auto& v : m.scores) v = static_cast<float>(std::floor(rng.uniform() * 0x1p24) * 0x1p-24);
  m.method = method;
  m.baseline = "none";
  return m;
}

double target_logit(const LatentGrid& z, const ClassifierModel& classifier, int target) {
  check_target(classifier, target);
  return logits(z, classifier)[static_cast<std::size_t>(target)];
}

double target_logit(const AudioClip& x, const CodecModel& codec, const ClassifierModel& classifier, int target) {
  return target_logit(encode(x, codec), classifier, target);
}

}  // namespace axg
