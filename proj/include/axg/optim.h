#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/tensor.h"

namespace axg {

struct AdamConfig {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Keys learning_rate, beta1, beta2, epsilon. Values are written with the shortest decimal that
// reads back to the same float, so config files show 0.9 rather than 0.8999999761581421.
void adam_to_json(const AdamConfig& config, nlohmann::json& out);
AdamConfig adam_from_json(const nlohmann::json& j, AdamConfig defaults = {});

// First/second moment estimates, one buffer per parameter tensor.
struct AdamState {
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update. The state is sized lazily on the first call.
void adam_step(std::span<Tensor* const> params, std::span<const std::vector<float>> grads, AdamState& state,
               const AdamConfig& config);

}  // namespace axg
