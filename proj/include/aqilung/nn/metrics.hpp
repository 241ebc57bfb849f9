// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::nn {

/// Mean of squared differences over every element.
inline double mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mse_loss shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(target.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    sum += r * r;
  }
  return sum / static_cast<double>(pred.size());
}

/// dL/dpred of mse_loss.
inline Tensor mse_gradient(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mse_gradient shape mismatch " + shape_str(pred.shape()) + " vs " +
                         shape_str(target.shape()));
  }
  Tensor g(pred.shape());
  const double k = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = k * (pred[i] - target[i]);
  return g;
}

/// Coefficient of determination.
inline double r2_score(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw DimensionError("r2_score length mismatch");
  if (target.size() < 2) throw DomainError("r2_score needs at least two samples");
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  if (ss_tot == 0.0) throw DomainError("r2_score undefined: target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

inline double r2_score(const Tensor& pred, const Tensor& target) {
  return r2_score(pred.data(), target.data());
}

/// Extracts one column of a matrix.
inline std::vector<double> column(const Tensor& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, c);
  return out;
}

}  // namespace aqilung::nn
