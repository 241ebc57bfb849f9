// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/nn/adam.hpp"
#include "aqilung/nn/mlp.hpp"
#include "aqilung/rng.hpp"

namespace aqilung::nn {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpRegressor model;
  /// Sample-weighted mean training loss of each epoch.
  std::vector<double> loss_history;
};

/// Splits a shuffled index order into mini-batches. A trailing batch of a
/// single row is merged into its predecessor, since batch-norm needs two rows.
inline std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                          std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

/// Mini-batch Adam on mse_loss. Deterministic for a fixed (model, data, config).
inline TrainResult train_regressor(MlpRegressor model, const Tensor& features, const Tensor& targets,
                                   const TrainConfig& config) {
  if (features.empty() || features.rows() == 0) throw DomainError("train_regressor: empty dataset");
  if (targets.rank() != 2 || targets.cols() != kOutputDim) {
    throw DimensionError("train_regressor: targets must be " + std::to_string(kOutputDim) +
                         " wide, got " + shape_str(targets.shape()));
  }
  if (targets.rows() != features.rows()) throw DimensionError("train_regressor: row count mismatch");
  if (features.cols() != model.input_dim()) {
    throw DimensionError("train_regressor: feature width " + std::to_string(features.cols()) +
                         " but model expects " + std::to_string(model.input_dim()));
  }
  if (features.rows() < 2) throw DomainError("train_regressor: need at least two rows for batch-norm");
  if (config.batch_size < 2) throw DomainError("train_regressor: batch_size must be at least 2");

  SeededRng shuffle_rng = SeededRng(config.seed).derive(1);
  SeededRng dropout_rng = SeededRng(config.seed).derive(2);
  const auto params_view = model.parameters();
  std::vector<const Tensor*> const_params(params_view.begin(), params_view.end());
  AdamState adam = AdamState::for_parameters(const_params, {config.learning_rate});

  std::vector<std::size_t> order(features.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.loss_history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double weighted = 0.0;
    for (const auto& batch : make_batches(order, config.batch_size)) {
      const Tensor xb = gather_rows(features, batch);
      const Tensor yb = gather_rows(targets, batch);
      BackpropResult step;
      try {
        step = backprop_gradients(model, xb, yb, Mode::kTrain, dropout_rng);
      } catch (const NumericError& e) {
        throw DivergenceError(epoch + 1, e.what());
      }
      weighted += step.loss * static_cast<double>(batch.size());
      auto params = model.parameters();
      adam_step(params, step.grads, adam);
    }
    const double epoch_loss = weighted / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch + 1, "non-finite training loss");
    result.loss_history.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace aqilung::nn
