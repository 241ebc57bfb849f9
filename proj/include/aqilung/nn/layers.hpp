// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::nn {

enum class Mode { kTrain, kEval };

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

struct DenseLayer {
  Tensor weights;  // [in_dim x out_dim]
  Tensor bias;     // [out_dim]

  std::size_t in_dim() const { return weights.shape()[0]; }
  std::size_t out_dim() const { return weights.shape()[1]; }

  /// Uniform Glorot initialization, zero bias.
  static DenseLayer glorot(std::size_t in_dim, std::size_t out_dim, SeededRng& rng) {
    DenseLayer layer{Tensor({in_dim, out_dim}), Tensor({out_dim})};
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
    return layer;
  }
};

struct DenseGrads {
  Tensor weights;
  Tensor bias;
};

inline Tensor dense_forward(const Tensor& x, const DenseLayer& layer) {
  if (x.rank() != 2 || x.cols() != layer.in_dim()) {
    throw DimensionError("dense input " + shape_str(x.shape()) + " incompatible with weights " +
                         shape_str(layer.weights.shape()));
  }
  const std::size_t n = x.rows(), in = layer.in_dim(), out = layer.out_dim();
  Tensor y({n, out});
  const double* w = layer.weights.data().data();
  const double* b = layer.bias.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* yi = y.row(i).data();
    for (std::size_t j = 0; j < out; ++j) yi[j] = b[j];
    const double* xi = x.row(i).data();
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xi[k];
      const double* wk = w + k * out;
      for (std::size_t j = 0; j < out; ++j) yi[j] += xv * wk[j];
    }
  }
  return y;
}

/// Accumulates parameter gradients into `grads` and returns dL/dx.
inline Tensor dense_backward(const Tensor& x, const DenseLayer& layer, const Tensor& dy,
                             DenseGrads& grads) {
  const std::size_t n = x.rows(), in = layer.in_dim(), out = layer.out_dim();
  const double* w = layer.weights.data().data();
  double* gw = grads.weights.data().data();
  double* gb = grads.bias.data().data();
  Tensor dx({n, in});
  for (std::size_t i = 0; i < n; ++i) {
    const double* dyi = dy.row(i).data();
    const double* xi = x.row(i).data();
    double* dxi = dx.row(i).data();
    for (std::size_t j = 0; j < out; ++j) gb[j] += dyi[j];
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xi[k];
      const double* wk = w + k * out;
      double* gwk = gw + k * out;
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        gwk[j] += xv * dyi[j];
        acc += dyi[j] * wk[j];
      }
      dxi[k] = acc;
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Batch normalization
// ---------------------------------------------------------------------------

struct BatchNormLayer {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  double epsilon = 1e-5;
  double momentum = 0.1;

  std::size_t dim() const { return gamma.size(); }

  static BatchNormLayer identity(std::size_t dim, double epsilon = 1e-5, double momentum = 0.1) {
    if (!(epsilon > 0.0)) throw DomainError("batch-norm epsilon must be positive");
    if (!(momentum > 0.0 && momentum <= 1.0)) throw DomainError("batch-norm momentum must be in (0,1]");
    return {Tensor({dim}, 1.0), Tensor({dim}, 0.0), Tensor({dim}, 0.0), Tensor({dim}, 1.0), epsilon,
            momentum};
  }
};

struct BatchNormGrads {
  Tensor gamma;
  Tensor beta;
};

/// Values kept from a Train-mode forward pass for the backward pass.
struct BatchNormCache {
  Tensor x_hat;
  std::vector<double> inv_std;
};

/// Eval-mode normalization with the running statistics; never mutates.
inline Tensor batchnorm_infer(const Tensor& x, const BatchNormLayer& layer) {
  const std::size_t n = x.rows(), d = x.cols();
  if (d != layer.dim()) {
    throw DimensionError("batch-norm input " + shape_str(x.shape()) + " but layer width " +
                         std::to_string(layer.dim()));
  }
  Tensor y({n, d});
  for (std::size_t j = 0; j < d; ++j) {
    const double scale = layer.gamma[j] / std::sqrt(layer.running_var[j] + layer.epsilon);
    const double shift = layer.beta[j] - layer.running_mean[j] * scale;
    for (std::size_t i = 0; i < n; ++i) y(i, j) = x(i, j) * scale + shift;
  }
  return y;
}

/// Normalizes each column. In Train mode uses the (biased) batch statistics
/// and, when `update_running` is set, folds them into the running estimates.
inline Tensor batchnorm_forward(const Tensor& x, BatchNormLayer& layer, Mode mode,
                                BatchNormCache* cache = nullptr, bool update_running = true) {
  if (mode == Mode::kEval) return batchnorm_infer(x, layer);
  const std::size_t n = x.rows(), d = x.cols();
  if (d != layer.dim()) {
    throw DimensionError("batch-norm input " + shape_str(x.shape()) + " but layer width " +
                         std::to_string(layer.dim()));
  }
  if (n < 2) throw DomainError("batch-norm in Train mode needs a batch of at least 2 rows");

  Tensor x_hat({n, d});
  Tensor y({n, d});
  std::vector<double> inv_std(d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean *= inv_n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = x(i, j) - mean;
      var += c * c;
    }
    var *= inv_n;
    inv_std[j] = 1.0 / std::sqrt(var + layer.epsilon);
    for (std::size_t i = 0; i < n; ++i) {
      x_hat(i, j) = (x(i, j) - mean) * inv_std[j];
      y(i, j) = layer.gamma[j] * x_hat(i, j) + layer.beta[j];
    }
    if (update_running) {
      layer.running_mean[j] = (1.0 - layer.momentum) * layer.running_mean[j] + layer.momentum * mean;
      layer.running_var[j] = (1.0 - layer.momentum) * layer.running_var[j] + layer.momentum * var;
    }
  }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

inline Tensor batchnorm_backward(const BatchNormLayer& layer, const BatchNormCache& cache,
                                 const Tensor& dy, BatchNormGrads& grads) {
  const std::size_t n = dy.rows(), d = dy.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Tensor dx({n, d});
  for (std::size_t j = 0; j < d; ++j) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_dy += dy(i, j);
      sum_dy_xhat += dy(i, j) * cache.x_hat(i, j);
    }
    grads.beta[j] += sum_dy;
    grads.gamma[j] += sum_dy_xhat;
    const double k = layer.gamma[j] * cache.inv_std[j] * inv_n;
    for (std::size_t i = 0; i < n; ++i) {
      dx(i, j) = k * (static_cast<double>(n) * dy(i, j) - sum_dy - cache.x_hat(i, j) * sum_dy_xhat);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

struct DropoutLayer {
  double rate = 0.0;

  explicit DropoutLayer(double r = 0.0) : rate(r) {
    if (!(r >= 0.0 && r < 1.0)) throw DomainError("dropout rate must be in [0,1)");
  }
};

/// Per-element multiplier (0 or 1/(1-rate)). Empty means identity.
struct DropoutMask {
  std::vector<double> scale;
  bool identity() const noexcept { return scale.empty(); }
};

inline DropoutMask sample_dropout_mask(std::size_t count, double rate, SeededRng& rng) {
  DropoutMask mask;
  mask.scale.resize(count);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& s : mask.scale) s = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

inline Tensor apply_dropout_mask(const Tensor& x, const DropoutMask& mask) {
  if (mask.identity()) return x;
  if (mask.scale.size() != x.size()) throw DimensionError("dropout mask size mismatch");
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask.scale[i];
  return y;
}

/// Inverted dropout. Eval mode and rate 0 consume no randomness.
inline std::pair<Tensor, DropoutMask> dropout_forward(const Tensor& x, const DropoutLayer& layer,
                                                      Mode mode, SeededRng& rng) {
  if (mode == Mode::kEval || layer.rate == 0.0) return {x, DropoutMask{}};
  DropoutMask mask = sample_dropout_mask(x.size(), layer.rate, rng);
  Tensor y = apply_dropout_mask(x, mask);
  return {std::move(y), std::move(mask)};
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

inline Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

/// dL/dx given the ReLU input `x` and upstream gradient.
inline Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

}  // namespace aqilung::nn
