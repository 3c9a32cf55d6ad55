#include "axg/optim.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "axg/errors.h"

namespace axg {

namespace {

double short_decimal(float v) {
  char buf[32];
  for (int digits = 1; digits <= 9; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, static_cast<double>(v));
    const double d = std::strtod(buf, nullptr);
    if (static_cast<float>(d) == v) return d;
  }
  return v;
}

}  // namespace

void adam_to_json(const AdamConfig& config, nlohmann::json& out) {
  out["learning_rate"] = short_decimal(config.learning_rate);
  out["beta1"] = short_decimal(config.beta1);
  out["beta2"] = short_decimal(config.beta2);
  out["epsilon"] = short_decimal(config.epsilon);
}

AdamConfig adam_from_json(const nlohmann::json& j, AdamConfig defaults) {
  defaults.learning_rate = j.value("learning_rate", defaults.learning_rate);
  defaults.beta1 = j.value("beta1", defaults.beta1);
  defaults.beta2 = j.value("beta2", defaults.beta2);
  defaults.epsilon = j.value("epsilon", defaults.epsilon);
  return defaults;
}

void adam_step(std::span<Tensor* const> params, std::span<const std::vector<float>> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->numel(), 0.0f);
      state.second_moment.emplace_back(p->numel(), 0.0f);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state tracks a different parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i]->numel() || state.first_moment[i].size() != params[i]->numel()) {
      throw DimensionError("adam_step: size mismatch for parameter " + std::to_string(i));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const auto bias1 = static_cast<float>(1.0 - std::pow(static_cast<double>(config.beta1), t));
  const auto bias2 = static_cast<float>(1.0 - std::pow(static_cast<double>(config.beta2), t));
  const float b1 = config.beta1, b2 = config.beta2;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i]->data;
    const auto& g = grads[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0f - b1) * g[j];
      v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
      const float m_hat = m[j] / bias1;
      const float v_hat = v[j] / bias2;
      p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace axg
