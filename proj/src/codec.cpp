#include "axg/codec.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "axg/errors.h"
#include "axg/random.h"

namespace axg {

LatentGrid::LatentGrid(std::size_t t, std::size_t l) : frames(t), channels(l), values(t * l, 0.0f) {}

LatentGrid::LatentGrid(std::size_t t, std::size_t l, std::vector<float> v)
    : frames(t), channels(l), values(std::move(v)) {
  if (values.size() != t * l) {
    throw DimensionError("latent grid " + std::to_string(t) + "x" + std::to_string(l) + " given " +
                         std::to_string(values.size()) + " values");
  }
}

LatentGrid LatentGrid::from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw DimensionError("latent tensor must be [T x L], got " + shape_str(t.shape));
  return LatentGrid(t.dim(0), t.dim(1), t.data);
}

// ---------------------------------------------------------------------------
// CodecConfig

void CodecConfig::validate() const {
  const std::size_t layers = strides.size();
  if (layers == 0) throw ContractError("codec needs at least one layer");
  if (kernel_sizes.size() != layers || hidden_channels.size() + 1 != layers) {
    throw ContractError("codec config: " + std::to_string(layers) + " strides, " +
                        std::to_string(kernel_sizes.size()) + " kernels and " +
                        std::to_string(hidden_channels.size()) + " hidden widths do not describe one stack");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    if (strides[i] == 0) throw ContractError("codec config: zero stride");
    if (kernel_sizes[i] < strides[i]) throw ContractError("codec config: kernel shorter than its stride");
  }
  for (auto w : widths()) {
    if (w == 0) throw ContractError("codec config: zero channel width");
  }
  if (sample_rate <= 0) throw ContractError("codec config: sample rate must be positive");
}

std::vector<std::size_t> CodecConfig::widths() const {
  std::vector<std::size_t> w{1};
  w.insert(w.end(), hidden_channels.begin(), hidden_channels.end());
  w.push_back(latent_channels);
  return w;
}

std::size_t CodecConfig::stride_product() const {
  return std::accumulate(strides.begin(), strides.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t CodecConfig::margin() const {
  std::size_t m = 0, scale = 1;
  for (std::size_t i = 0; i < strides.size(); ++i) {
    m += (kernel_sizes[i] - strides[i]) * scale;
    scale *= strides[i];
  }
  return m;
}

std::size_t CodecConfig::receptive_field() const {
  std::size_t r = 1, scale = 1;
  for (std::size_t i = 0; i < strides.size(); ++i) {
    r += (kernel_sizes[i] - 1) * scale;
    scale *= strides[i];
  }
  return r;
}

nlohmann::json CodecConfig::to_json() const {
  return {{"sample_rate", sample_rate},         {"clip_length", clip_length},
          {"hidden_channels", hidden_channels}, {"latent_channels", latent_channels},
          {"kernel_sizes", kernel_sizes},       {"strides", strides}};
}

CodecConfig CodecConfig::from_json(const nlohmann::json& j) {
  CodecConfig c;
  c.sample_rate = j.at("sample_rate").get<int>();
  c.clip_length = j.at("clip_length").get<std::size_t>();
  c.hidden_channels = j.at("hidden_channels").get<std::vector<std::size_t>>();
  c.latent_channels = j.at("latent_channels").get<std::size_t>();
  c.kernel_sizes = j.at("kernel_sizes").get<std::vector<std::size_t>>();
  c.strides = j.at("strides").get<std::vector<std::size_t>>();
  c.validate();
  return c;
}

nlohmann::json CodecTrainConfig::to_json() const {
  nlohmann::json j = {{"epochs", epochs}, {"batch_size", batch_size}};
  adam_to_json(adam, j);
  return j;
}

CodecTrainConfig CodecTrainConfig::from_json(const nlohmann::json& j) {
  CodecTrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam = adam_from_json(j, c.adam);
  return c;
}

// ---------------------------------------------------------------------------
// Parameters

std::vector<Tensor*> CodecModel::parameters() {
  std::vector<Tensor*> out;
  for (auto* stack : {&encoder, &decoder}) {
    for (auto& layer : *stack) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<const Tensor*> CodecModel::encoder_parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : encoder) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

Checkpoint CodecModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "codec";
  ckpt.config = config.to_json();
  ckpt.metadata = metadata;
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    ckpt.tensors.push_back({"encoder." + std::to_string(i) + ".weight", encoder[i].weight});
    ckpt.tensors.push_back({"encoder." + std::to_string(i) + ".bias", encoder[i].bias});
  }
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    ckpt.tensors.push_back({"decoder." + std::to_string(i) + ".weight", decoder[i].weight});
    ckpt.tensors.push_back({"decoder." + std::to_string(i) + ".bias", decoder[i].bias});
  }
  return ckpt;
}

CodecModel CodecModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "codec") throw FormatError("checkpoint kind is '" + ckpt.kind + "', expected 'codec'");
  CodecModel m = zero_codec(CodecConfig::from_json(ckpt.config));
  m.metadata = ckpt.metadata;
  auto load = [&](const std::string& name, Tensor& dst) {
    const Tensor& src = ckpt.tensor(name);
    if (src.shape != dst.shape) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " + shape_str(src.shape) + ", config implies " +
                        shape_str(dst.shape));
    }
    dst = src;
  };
  for (std::size_t i = 0; i < m.encoder.size(); ++i) {
    load("encoder." + std::to_string(i) + ".weight", m.encoder[i].weight);
    load("encoder." + std::to_string(i) + ".bias", m.encoder[i].bias);
  }
  for (std::size_t i = 0; i < m.decoder.size(); ++i) {
    load("decoder." + std::to_string(i) + ".weight", m.decoder[i].weight);
    load("decoder." + std::to_string(i) + ".bias", m.decoder[i].bias);
  }
  return m;
}

CodecModel zero_codec(const CodecConfig& config) {
  config.validate();
  CodecModel m;
  m.config = config;
  const auto w = config.widths();
  const std::size_t layers = config.strides.size();
  for (std::size_t i = 0; i < layers; ++i) {
    m.encoder.push_back({Tensor({w[i + 1], w[i], config.kernel_sizes[i]}), Tensor({w[i + 1]})});
  }
  for (std::size_t j = 0; j < layers; ++j) {
    const std::size_t i = layers - 1 - j;
    m.decoder.push_back({Tensor({w[i + 1], w[i], config.kernel_sizes[i]}), Tensor({w[i]})});
  }
  return m;
}

CodecModel init_codec(const CodecConfig& config, std::uint64_t seed) {
  CodecModel m = zero_codec(config);
  Rng rng(seed);
  auto fill = [&](Tensor& t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
  };
  for (auto& layer : m.encoder) fill(layer.weight, layer.weight.dim(1) * layer.weight.dim(2));
  for (auto& layer : m.decoder) fill(layer.weight, layer.weight.dim(0) * layer.weight.dim(2));
  return m;
}

// ---------------------------------------------------------------------------
// Forward passes

namespace {

struct BoundLayer {
  Var weight;
  Var bias;
};

std::vector<BoundLayer> bind_layers(Graph& g, const std::vector<ConvLayer>& layers, bool trainable) {
  std::vector<BoundLayer> out;
  for (const auto& l : layers) out.push_back({g.leaf(l.weight, trainable), g.leaf(l.bias, trainable)});
  return out;
}

Var run_encoder(const CodecConfig& cfg, const std::vector<BoundLayer>& layers, Var wave) {
  const auto& shape = wave.shape();
  if (shape.size() != 2 || shape[0] != 1) throw DimensionError("encoder expects a [1 x N] waveform");
  const std::size_t n = shape[1];
  if (n < cfg.receptive_field()) {
    throw LengthError("clip of " + std::to_string(n) + " samples is shorter than the encoder receptive field (" +
                      std::to_string(cfg.receptive_field()) + ")");
  }
  const std::size_t usable = cfg.frames_for(n) * cfg.stride_product();
  Var h = usable == n ? wave : slice_time(wave, 0, usable);
  h = pad_time(h, cfg.margin_left(), cfg.margin() - cfg.margin_left());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = conv1d(h, layers[i].weight, layers[i].bias, cfg.strides[i]);
    if (i + 1 < layers.size()) h = elu(h);
  }
  return transpose(h);
}

Var run_decoder(const CodecConfig& cfg, const std::vector<BoundLayer>& layers, Var latent) {
  const auto& shape = latent.shape();
  if (shape.size() != 2 || shape[1] != cfg.latent_channels) {
    throw DimensionError("decoder expects [T x " + std::to_string(cfg.latent_channels) + "] latents, got " +
                         shape_str(shape));
  }
  const std::size_t frames = shape[0];
  const std::size_t n = cfg.strides.size();
  Var h = transpose(latent);
  for (std::size_t j = 0; j < layers.size(); ++j) {
    h = conv1d_transpose(h, layers[j].weight, layers[j].bias, cfg.strides[n - 1 - j]);
    if (j + 1 < layers.size()) h = elu(h);
  }
  h = slice_time(h, cfg.margin_left(), frames * cfg.stride_product());
  return tanh(h);
}

Tensor wave_tensor(const std::vector<float>& samples) { return Tensor({1, samples.size()}, samples); }

}  // namespace

Var encoder_forward(Graph& g, const CodecModel& model, Var wave) {
  return run_encoder(model.config, bind_layers(g, model.encoder, false), wave);
}

Var decoder_forward(Graph& g, const CodecModel& model, Var latent) {
  return run_decoder(model.config, bind_layers(g, model.decoder, false), latent);
}

LatentGrid encode(const AudioClip& clip, const CodecModel& model) {
  Graph g;
  Var z = encoder_forward(g, model, g.constant(wave_tensor(clip.samples())));
  return LatentGrid::from_tensor(z.value());
}

AudioClip decode(const LatentGrid& z, const CodecModel& model) {
  Graph g;
  Var wave = decoder_forward(g, model, g.constant(z.to_tensor()));
  return AudioClip(wave.value().data, model.config.sample_rate);
}

// ---------------------------------------------------------------------------
// Training

CodecModel train_autoencoder(std::span<const AudioClip> clips, const CodecConfig& config,
                             const CodecTrainConfig& train, std::uint64_t seed, const EpochCallback& on_epoch) {
  if (clips.empty()) throw ContractError("train_autoencoder: empty dataset");
  for (const auto& c : clips) {
    if (c.size() != clips.front().size()) throw ContractError("train_autoencoder: clips differ in length");
  }
  if (train.batch_size == 0) throw ContractError("train_autoencoder: zero batch size");

  CodecModel model = init_codec(config, derive_seed(seed, 0x1417));
  auto params = model.parameters();
  AdamState adam;
  std::vector<std::vector<float>> grads(params.size());
  nlohmann::json trace = nlohmann::json::array();

  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t usable = config.frames_for(clips.front().size()) * config.stride_product();
  double last = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    Rng rng(derive_seed(seed, 0x5f1e, epoch));
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train.batch_size) {
      const std::size_t stop = std::min(order.size(), start + train.batch_size);
      for (std::size_t i = 0; i < params.size(); ++i) grads[i].assign(params[i]->numel(), 0.0f);
      for (std::size_t b = start; b < stop; ++b) {
        const auto& samples = clips[order[b]].samples();
        Graph g;
        auto enc = bind_layers(g, model.encoder, true);
        auto dec = bind_layers(g, model.decoder, true);
        Var x = g.constant(wave_tensor(samples));
        Var recon = run_decoder(config, dec, run_encoder(config, enc, x));
        Var target = usable == samples.size() ? x : slice_time(x, 0, usable);
        Var loss = mean(square(sub(recon, target)));
        g.backward(loss);
        epoch_loss += loss.value().item();
        std::size_t p = 0;
        for (auto* stack : {&enc, &dec}) {
          for (const auto& layer : *stack) {
            for (Var v : {layer.weight, layer.bias}) {
              const auto& gv = v.grad();
              for (std::size_t k = 0; k < gv.size(); ++k) grads[p][k] += gv[k];
              ++p;
            }
          }
        }
      }
      const float inv = 1.0f / static_cast<float>(stop - start);
      for (auto& gv : grads) {
        for (auto& v : gv) v *= inv;
      }
      adam_step(params, grads, adam, train.adam);
    }
    last = epoch_loss / static_cast<double>(clips.size());
    trace.push_back(last);
    if (on_epoch) on_epoch(epoch, last);
  }

  model.metadata = {{"seed", seed},
                    {"epochs", train.epochs},
                    {"train", train.to_json()},
                    {"loss_trace", trace},
                    {"final_loss", last},
                    {"train_clips", clips.size()}};
  return model;
}

double reconstruction_mse(const AudioClip& original, const AudioClip& reconstruction) {
  if (original.size() != reconstruction.size()) {
    throw DimensionError("reconstruction length " + std::to_string(reconstruction.size()) + " vs original " +
                         std::to_string(original.size()));
  }
  double err = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = static_cast<double>(original.samples()[i]) - reconstruction.samples()[i];
    err += d * d;
  }
  return err / static_cast<double>(std::max<std::size_t>(1, original.size()));
}

double reconstruction_snr(const AudioClip& original, const AudioClip& reconstruction) {
  constexpr double kCap = 200.0;
  if (original.size() != reconstruction.size()) {
    throw DimensionError("reconstruction length " + std::to_string(reconstruction.size()) + " vs original " +
                         std::to_string(original.size()));
  }
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double x = original.samples()[i];
    const double d = x - reconstruction.samples()[i];
    signal += x * x;
    noise += d * d;
  }
  if (noise == 0.0) return kCap;
  if (signal == 0.0) return -kCap;
  return std::min(kCap, 10.0 * std::log10(signal / noise));
}

}  // namespace axg
