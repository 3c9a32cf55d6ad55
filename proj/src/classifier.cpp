#include "axg/classifier.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "axg/errors.h"
#include "axg/random.h"

namespace axg {

void LabeledLatentDataset::validate() const {
  if (latents.empty()) throw ContractError("latent dataset is empty");
  if (latents.size() != labels.size()) throw ContractError("latent dataset: latents and labels differ in count");
  if (class_count < 2) throw ContractError("latent dataset needs at least 2 classes");
  if (!class_names.empty() && class_names.size() != class_count) {
    throw ContractError("latent dataset: class names do not match class count");
  }
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (latents[i].frames != latents[0].frames || latents[i].channels != latents[0].channels) {
      throw DimensionError("latent dataset: grid " + std::to_string(i) + " differs in shape");
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw IndexError("latent dataset: label " + std::to_string(labels[i]) + " out of range");
    }
  }
}

nlohmann::json ClassifierConfig::to_json() const {
  nlohmann::json j = {{"hidden", hidden}, {"epochs", epochs}, {"batch_size", batch_size}};
  adam_to_json(adam, j);
  return j;
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& j) {
  ClassifierConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam = adam_from_json(j, c.adam);
  return c;
}

std::vector<Tensor*> ClassifierModel::parameters() { return {&w1, &b1, &w2, &b2}; }

Checkpoint ClassifierModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "classifier";
  ckpt.config = {{"frames", frames},
                 {"channels", channels},
                 {"hidden", hidden},
                 {"class_count", class_count},
                 {"class_names", class_names}};
  ckpt.metadata = metadata;
  ckpt.tensors = {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}};
  return ckpt;
}

ClassifierModel ClassifierModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "classifier") {
    throw FormatError("checkpoint kind is '" + ckpt.kind + "', expected 'classifier'");
  }
  ClassifierModel m;
  try {
    m = zero_classifier(ckpt.config.at("frames").get<std::size_t>(), ckpt.config.at("channels").get<std::size_t>(),
                        ckpt.config.at("hidden").get<std::size_t>(),
                        ckpt.config.at("class_names").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("classifier checkpoint config: ") + e.what());
  }
  for (auto [name, dst] : {std::pair{"w1", &m.w1}, {"b1", &m.b1}, {"w2", &m.w2}, {"b2", &m.b2}}) {
    const Tensor& src = ckpt.tensor(name);
    if (src.shape != dst->shape) throw FormatError(std::string("classifier tensor '") + name + "' has wrong shape");
    *dst = src;
  }
  m.metadata = ckpt.metadata;
  return m;
}

ClassifierModel zero_classifier(std::size_t frames, std::size_t channels, std::size_t hidden,
                                std::vector<std::string> class_names) {
  if (frames == 0 || channels == 0 || hidden == 0) throw ContractError("classifier dimensions must be positive");
  if (class_names.size() < 2) throw ContractError("classifier needs at least 2 classes");
  ClassifierModel m;
  m.frames = frames;
  m.channels = channels;
  m.hidden = hidden;
  m.class_count = class_names.size();
  m.class_names = std::move(class_names);
  m.w1 = Tensor({channels, hidden});
  m.b1 = Tensor({hidden});
  m.w2 = Tensor({hidden, m.class_count});
  m.b2 = Tensor({m.class_count});
  return m;
}

ClassifierModel init_classifier(std::size_t frames, std::size_t channels, std::size_t hidden,
                                std::vector<std::string> class_names, std::uint64_t seed) {
  ClassifierModel m = zero_classifier(frames, channels, hidden, std::move(class_names));
  Rng rng(seed);
  for (Tensor* w : {&m.w1, &m.w2}) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w->dim(0)));
    for (auto& v : w->data) v = static_cast<float>(rng.uniform(-bound, bound));
  }
  return m;
}

namespace {

struct BoundHead {
  Var w1, b1, w2, b2;
};

BoundHead bind_head(Graph& g, const ClassifierModel& m, bool trainable) {
  return {g.leaf(m.w1, trainable), g.leaf(m.b1, trainable), g.leaf(m.w2, trainable), g.leaf(m.b2, trainable)};
}

Var run_head(const ClassifierModel& m, const BoundHead& p, Var latent) {
  const auto& s = latent.shape();
  if (s.size() != 2 || s[0] != m.frames || s[1] != m.channels) {
    throw DimensionError("classifier expects [" + std::to_string(m.frames) + "x" + std::to_string(m.channels) +
                         "] latents, got " + shape_str(s));
  }
  Var h = elu(add_bias(matmul(latent, p.w1), p.b1));
  return add_bias(matmul(mean_rows(h), p.w2), p.b2);
}

std::vector<float> softmax(const std::vector<float>& l) {
  const double mx = *std::max_element(l.begin(), l.end());
  std::vector<double> e(l.size());
  double z = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) z += e[i] = std::exp(static_cast<double>(l[i]) - mx);
  std::vector<float> p(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) p[i] = static_cast<float>(e[i] / z);
  return p;
}

}  // namespace

Var classifier_logits(Graph& g, const ClassifierModel& model, Var latent) {
  return run_head(model, bind_head(g, model, false), latent);
}

std::vector<float> logits(const LatentGrid& z, const ClassifierModel& model) {
  Graph g;
  return classifier_logits(g, model, g.constant(z.to_tensor())).value().data;
}

std::vector<float> classify(const LatentGrid& z, const ClassifierModel& model) { return softmax(logits(z, model)); }

int predict(const LatentGrid& z, const ClassifierModel& model) {
  const auto l = logits(z, model);
  return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

ClassifierModel train_classifier(const LabeledLatentDataset& data, const ClassifierConfig& config,
                                 std::uint64_t seed) {
  data.validate();
  if (config.batch_size == 0) throw ContractError("train_classifier: zero batch size");
  std::vector<std::string> names = data.class_names;
  if (names.empty()) {
    for (std::size_t c = 0; c < data.class_count; ++c) names.push_back("class_" + std::to_string(c));
  }
  ClassifierModel model = init_classifier(data.latents[0].frames, data.latents[0].channels, config.hidden,
                                          std::move(names), derive_seed(seed, 0xc1a5));
  auto params = model.parameters();
  AdamState adam;
  std::vector<std::vector<float>> grads(params.size());
  nlohmann::json trace = nlohmann::json::array();
  std::vector<std::size_t> order(data.latents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double last = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(seed, 0xe90c, epoch));
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = 0; i < params.size(); ++i) grads[i].assign(params[i]->numel(), 0.0f);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t idx = order[b];
        Graph g;
        BoundHead p = bind_head(g, model, true);
        Var out = run_head(model, p, g.constant(data.latents[idx].to_tensor()));
        Var loss = softmax_cross_entropy(out, static_cast<std::size_t>(data.labels[idx]));
        g.backward(loss);
        epoch_loss += loss.value().item();
        std::size_t k = 0;
        for (Var v : {p.w1, p.b1, p.w2, p.b2}) {
          const auto& gv = v.grad();
          for (std::size_t j = 0; j < gv.size(); ++j) grads[k][j] += gv[j];
          ++k;
        }
      }
      const float inv = 1.0f / static_cast<float>(stop - start);
      for (auto& gv : grads) {
        for (auto& v : gv) v *= inv;
      }
      adam_step(params, grads, adam, config.adam);
    }
    last = epoch_loss / static_cast<double>(order.size());
    trace.push_back(last);
  }
  model.metadata = {{"seed", seed},
                    {"train", config.to_json()},
                    {"loss_trace", trace},
                    {"final_loss", last},
                    {"train_samples", data.latents.size()},
                    {"train_accuracy", evaluate_accuracy(data, model)}};
  return model;
}

double evaluate_accuracy(const LabeledLatentDataset& data, const ClassifierModel& model) {
  if (data.latents.empty()) throw ContractError("evaluate_accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.latents.size(); ++i) {
    if (predict(data.latents[i], model) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.latents.size());
}

}  // namespace axg
