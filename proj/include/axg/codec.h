#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/audio.h"
#include "axg/checkpoint.h"
#include "axg/optim.h"
#include "axg/tensor.h"

namespace axg {

// T x L latent matrix, row-major (values[t * channels + l]).
struct LatentGrid {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::vector<float> values;

  LatentGrid() = default;
  LatentGrid(std::size_t t, std::size_t l);
  LatentGrid(std::size_t t, std::size_t l, std::vector<float> v);

  std::size_t size() const { return values.size(); }
  float at(std::size_t t, std::size_t l) const { return values[t * channels + l]; }
  float& at(std::size_t t, std::size_t l) { return values[t * channels + l]; }
  Tensor to_tensor() const { return Tensor({frames, channels}, values); }
  static LatentGrid from_tensor(const Tensor& t);

  friend bool operator==(const LatentGrid&, const LatentGrid&) = default;
};

// Strided conv encoder / transposed-conv decoder layout. Layer i maps channel width
// widths()[i] to widths()[i+1]; the decoder mirrors the encoder layer for layer.
struct CodecConfig {
  int sample_rate = 16000;
  std::size_t clip_length = 16384;
  std::vector<std::size_t> hidden_channels{16, 32};
  std::size_t latent_channels = 32;
  std::vector<std::size_t> kernel_sizes{8, 8, 8};
  std::vector<std::size_t> strides{4, 4, 4};

  void validate() const;
  std::vector<std::size_t> widths() const;  // {1, hidden..., latent}
  std::size_t stride_product() const;
  // Zero margin around the waveform that makes valid convolutions land on exactly
  // N / stride_product frames: sum_i (K_i - s_i) * prod_{j<i} s_j.
  std::size_t margin() const;
  std::size_t margin_left() const { return margin() / 2; }
  std::size_t receptive_field() const;
  std::size_t frames_for(std::size_t samples) const { return samples / stride_product(); }

  nlohmann::json to_json() const;
  static CodecConfig from_json(const nlohmann::json& j);
};

struct ConvLayer {
  Tensor weight;
  Tensor bias;
};

struct CodecModel {
  CodecConfig config;
  std::vector<ConvLayer> encoder;
  std::vector<ConvLayer> decoder;
  nlohmann::json metadata = nlohmann::json::object();

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> encoder_parameters() const;

  Checkpoint to_checkpoint() const;
  static CodecModel from_checkpoint(const Checkpoint& ckpt);
};

// Uniform(+-1/sqrt(fan_in)) weights, zero biases.
CodecModel init_codec(const CodecConfig& config, std::uint64_t seed);
CodecModel zero_codec(const CodecConfig& config);

// Graph-level building blocks: wave [1 x N] -> latent [T x L] -> wave [1 x T*stride_product].
Var encoder_forward(Graph& g, const CodecModel& model, Var wave);
Var decoder_forward(Graph& g, const CodecModel& model, Var latent);

LatentGrid encode(const AudioClip& clip, const CodecModel& model);
AudioClip decode(const LatentGrid& z, const CodecModel& model);

struct CodecTrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  AdamConfig adam{};

  nlohmann::json to_json() const;
  static CodecTrainConfig from_json(const nlohmann::json& j);
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Minimizes waveform MSE with Adam over seeded-shuffled mini-batches.
// The returned model's metadata records seed, epochs, per-epoch loss and final loss.
CodecModel train_autoencoder(std::span<const AudioClip> clips, const CodecConfig& config,
                             const CodecTrainConfig& train, std::uint64_t seed,
                             const EpochCallback& on_epoch = {});

double reconstruction_mse(const AudioClip& original, const AudioClip& reconstruction);
// 10 log10(|x|^2 / |x - x_hat|^2) in dB, capped at 200 dB for an exact match.
double reconstruction_snr(const AudioClip& original, const AudioClip& reconstruction);

}  // namespace axg
