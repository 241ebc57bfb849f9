// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::size_t step_count = 0;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Tensor* const> params, AdamConfig config = {}) {
    if (!(config.learning_rate >= 0.0)) throw DomainError("adam learning rate must be non-negative");
    if (!(config.beta1 > 0.0 && config.beta1 < 1.0 && config.beta2 > 0.0 && config.beta2 < 1.0)) {
      throw DomainError("adam betas must lie in (0,1)");
    }
    if (!(config.epsilon > 0.0)) throw DomainError("adam epsilon must be positive");
    AdamState s{config, {}, {}, 0};
    for (const Tensor* p : params) {
      s.first_moment.emplace_back(p->shape());
      s.second_moment.emplace_back(p->shape());
    }
    return s;
  }
};

/// One bias-corrected Adam update, in place.
inline void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment counts differ");
  }
  const auto& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    const Tensor& g = grads[p];
    Tensor& m = state.first_moment[p];
    Tensor& v = state.second_moment[p];
    if (w.shape() != g.shape() || w.shape() != m.shape()) {
      throw DimensionError("adam_step: shape mismatch at parameter " + std::to_string(p));
    }
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correct1;
      const double v_hat = v[k] / correct2;
      w[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace aqilung::nn
