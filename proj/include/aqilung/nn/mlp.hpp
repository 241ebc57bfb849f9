// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/nn/layers.hpp"
#include "aqilung/nn/metrics.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::nn {

/// Regression head width: AQI, PM2.5, PM10, O3, CO, SO2, NO2.
inline constexpr std::size_t kOutputDim = 7;

struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{512, 256, 128, 64};
  double dropout_rate = 0.3;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;
};

/// Dense -> ReLU -> BatchNorm -> Dropout.
struct HiddenBlock {
  DenseLayer dense;
  BatchNormLayer norm;
  DropoutLayer dropout;
};

using Gradients = std::vector<Tensor>;

/// Stack of hidden blocks followed by a linear 7-wide output layer.
class MlpRegressor {
 public:
  MlpRegressor() = default;

  MlpRegressor(MlpConfig config, std::vector<HiddenBlock> blocks, DenseLayer output)
      : config_(std::move(config)), blocks_(std::move(blocks)), output_(std::move(output)) {
    validate();
  }

  static MlpRegressor create(const MlpConfig& config, std::uint64_t seed) {
    if (config.input_dim == 0) throw DomainError("mlp input_dim must be positive");
    SeededRng rng(seed);
    std::vector<HiddenBlock> blocks;
    std::size_t in = config.input_dim;
    for (std::size_t width : config.hidden) {
      blocks.push_back({DenseLayer::glorot(in, width, rng),
                        BatchNormLayer::identity(width, config.bn_epsilon, config.bn_momentum),
                        DropoutLayer(config.dropout_rate)});
      in = width;
    }
    DenseLayer out = DenseLayer::glorot(in, kOutputDim, rng);
    return MlpRegressor(config, std::move(blocks), std::move(out));
  }

  const MlpConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return config_.input_dim; }
  const std::vector<HiddenBlock>& blocks() const noexcept { return blocks_; }
  std::vector<HiddenBlock>& blocks() noexcept { return blocks_; }
  const DenseLayer& output_layer() const noexcept { return output_; }
  DenseLayer& output_layer() noexcept { return output_; }

  /// Trainable tensors in a fixed order: per block W, b, gamma, beta; then output W, b.
  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for (auto& b : blocks_) {
      out.insert(out.end(), {&b.dense.weights, &b.dense.bias, &b.norm.gamma, &b.norm.beta});
    }
    out.insert(out.end(), {&output_.weights, &output_.bias});
    return out;
  }

  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& b : blocks_) {
      out.insert(out.end(), {&b.dense.weights, &b.dense.bias, &b.norm.gamma, &b.norm.beta});
    }
    out.insert(out.end(), {&output_.weights, &output_.bias});
    return out;
  }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const std::string p = "hidden" + std::to_string(i) + ".";
      out.insert(out.end(), {p + "dense.weights", p + "dense.bias", p + "norm.gamma", p + "norm.beta"});
    }
    out.insert(out.end(), {"output.weights", "output.bias"});
    return out;
  }

  /// Batch-norm running statistics, ordered per block: mean, var.
  std::vector<const Tensor*> buffers() const {
    std::vector<const Tensor*> out;
    for (const auto& b : blocks_) out.insert(out.end(), {&b.norm.running_mean, &b.norm.running_var});
    return out;
  }
  std::vector<Tensor*> buffers() {
    std::vector<Tensor*> out;
    for (auto& b : blocks_) out.insert(out.end(), {&b.norm.running_mean, &b.norm.running_var});
    return out;
  }

  Gradients zero_gradients() const {
    Gradients g;
    for (const Tensor* p : parameters()) g.emplace_back(p->shape());
    return g;
  }

  /// Eval-mode forward pass. Thread-safe on a const model.
  Tensor predict(const Tensor& x) const {
    Tensor h = x;
    for (const auto& b : blocks_) h = batchnorm_infer(relu(dense_forward(h, b.dense)), b.norm);
    return dense_forward(h, output_);
  }

 private:
  void validate() const {
    std::size_t in = config_.input_dim;
    if (in == 0) throw DomainError("mlp input_dim must be positive");
    if (blocks_.size() != config_.hidden.size()) throw DimensionError("hidden block count mismatch");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto& b = blocks_[i];
      if (b.dense.in_dim() != in || b.dense.out_dim() != config_.hidden[i] ||
          b.dense.bias.size() != b.dense.out_dim() || b.norm.dim() != b.dense.out_dim()) {
        throw DimensionError("hidden block " + std::to_string(i) + " does not chain from width " +
                             std::to_string(in));
      }
      in = b.dense.out_dim();
    }
    if (output_.in_dim() != in || output_.out_dim() != kOutputDim || output_.bias.size() != kOutputDim) {
      throw DimensionError("output layer must map width " + std::to_string(in) + " to " +
                           std::to_string(kOutputDim));
    }
  }

  MlpConfig config_;
  std::vector<HiddenBlock> blocks_;
  DenseLayer output_;
};

/// Intermediate values of one Train-mode forward pass.
struct ForwardTrace {
  struct Block {
    Tensor input;
    Tensor pre_activation;
    BatchNormCache norm;
    DropoutMask mask;
  };
  std::vector<Block> blocks;
  Tensor output_input;
  Tensor output;
};

struct ForwardOptions {
  Mode mode = Mode::kTrain;
  bool update_running_stats = true;
  /// When set, these masks are reused instead of sampling new ones.
  const std::vector<DropoutMask>* frozen_masks = nullptr;
};

namespace detail {
inline void require_finite(const Tensor& t, const std::string& layer) {
  if (!t.all_finite()) throw NumericError(layer, "non-finite value");
}
}  // namespace detail

/// Forward pass with trace capture. Train mode may mutate running statistics.
inline Tensor forward(MlpRegressor& model, const Tensor& x, const ForwardOptions& opts,
                      SeededRng& rng, ForwardTrace* trace = nullptr) {
  if (opts.mode == Mode::kEval) return model.predict(x);
  auto& blocks = model.blocks();
  if (opts.frozen_masks && opts.frozen_masks->size() != blocks.size()) {
    throw DimensionError("frozen mask count does not match hidden block count");
  }
  if (trace) trace->blocks.assign(blocks.size(), {});
  Tensor h = x;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& b = blocks[i];
    const std::string name = "hidden" + std::to_string(i);
    Tensor z = dense_forward(h, b.dense);
    detail::require_finite(z, name + ".dense");
    BatchNormCache cache;
    Tensor a = batchnorm_forward(relu(z), b.norm, Mode::kTrain, &cache, opts.update_running_stats);
    detail::require_finite(a, name + ".norm");
    DropoutMask mask;
    if (opts.frozen_masks) {
      mask = (*opts.frozen_masks)[i];
      a = apply_dropout_mask(a, mask);
    } else {
      auto [y, m] = dropout_forward(a, b.dropout, Mode::kTrain, rng);
      a = std::move(y);
      mask = std::move(m);
    }
    if (trace) {
      trace->blocks[i].input = std::move(h);
      trace->blocks[i].pre_activation = std::move(z);
      trace->blocks[i].norm = std::move(cache);
      trace->blocks[i].mask = std::move(mask);
    }
    h = std::move(a);
  }
  Tensor y = dense_forward(h, model.output_layer());
  detail::require_finite(y, "output");
  if (trace) {
    trace->output_input = std::move(h);
    trace->output = y;
  }
  return y;
}

struct BackpropResult {
  double loss = 0.0;
  Gradients grads;
};

/// Backward pass over a recorded trace, returning gradients of mse_loss.
inline Gradients backward(const MlpRegressor& model, const ForwardTrace& trace, const Tensor& target) {
  Gradients grads = model.zero_gradients();
  const auto& blocks = model.blocks();
  const std::size_t nb = blocks.size();
  Tensor d = mse_gradient(trace.output, target);
  DenseGrads out_g{std::move(grads[4 * nb]), std::move(grads[4 * nb + 1])};
  d = dense_backward(trace.output_input, model.output_layer(), d, out_g);
  grads[4 * nb] = std::move(out_g.weights);
  grads[4 * nb + 1] = std::move(out_g.bias);
  for (std::size_t i = nb; i-- > 0;) {
    const auto& b = blocks[i];
    const auto& t = trace.blocks[i];
    const std::string name = "hidden" + std::to_string(i);
    d = apply_dropout_mask(d, t.mask);
    BatchNormGrads bn_g{std::move(grads[4 * i + 2]), std::move(grads[4 * i + 3])};
    d = batchnorm_backward(b.norm, t.norm, d, bn_g);
    detail::require_finite(d, name + ".norm(backward)");
    grads[4 * i + 2] = std::move(bn_g.gamma);
    grads[4 * i + 3] = std::move(bn_g.beta);
    d = relu_backward(t.pre_activation, d);
    DenseGrads dense_g{std::move(grads[4 * i]), std::move(grads[4 * i + 1])};
    d = dense_backward(t.input, b.dense, d, dense_g);
    detail::require_finite(d, name + ".dense(backward)");
    grads[4 * i] = std::move(dense_g.weights);
    grads[4 * i + 1] = std::move(dense_g.bias);
  }
  return grads;
}

/// Exact gradients of the MSE loss for one Train-mode pass.
inline BackpropResult backprop_gradients(MlpRegressor& model, const Tensor& x, const Tensor& target,
                                         Mode mode, SeededRng& rng,
                                         const std::vector<DropoutMask>* frozen_masks = nullptr,
                                         bool update_running_stats = true) {
  if (mode != Mode::kTrain) throw DomainError("backprop_gradients requires Train mode");
  ForwardTrace trace;
  ForwardOptions opts{Mode::kTrain, update_running_stats, frozen_masks};
  forward(model, x, opts, rng, &trace);
  BackpropResult result;
  result.loss = mse_loss(trace.output, target);
  if (!std::isfinite(result.loss)) throw NumericError("loss", "non-finite loss");
  result.grads = backward(model, trace, target);
  return result;
}

/// Max over every parameter element of
/// |analytic - central difference| / max(1, |analytic|, |numeric|).
/// The central difference uses the five-point stencil so that truncation
/// error stays below the audit threshold for ill-conditioned batch-norm units.
/// Dropout masks are sampled once from `mask_seed` and frozen for the check.
inline double grad_check(const MlpRegressor& model_in, const Tensor& x, const Tensor& target, double eps,
                         std::uint64_t mask_seed = 0) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw DomainError("grad_check eps must lie in [1e-7, 1e-3]");
  MlpRegressor model = model_in;
  SeededRng rng(mask_seed);
  std::vector<DropoutMask> masks;
  {
    ForwardTrace trace;
    forward(model, x, {Mode::kTrain, false, nullptr}, rng, &trace);
    for (auto& b : trace.blocks) masks.push_back(b.mask);
  }
  const BackpropResult analytic = backprop_gradients(model, x, target, Mode::kTrain, rng, &masks, false);
  const ForwardOptions opts{Mode::kTrain, false, &masks};
  auto loss_at = [&]() { return mse_loss(forward(model, x, opts, rng), target); };

  double worst = 0.0;
  auto params = model.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = *params[p];
    for (std::size_t k = 0; k < param.size(); ++k) {
      const double saved = param[k];
      auto loss_shifted = [&](double delta) {
        param[k] = saved + delta;
        const double l = loss_at();
        param[k] = saved;
        return l;
      };
      // Fourth-order central stencil at step eps.
      const double near = loss_shifted(eps) - loss_shifted(-eps);
      const double far = loss_shifted(2.0 * eps) - loss_shifted(-2.0 * eps);
      const double numeric = (8.0 * near - far) / (12.0 * eps);
      const double a = analytic.grads[p][k];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace aqilung::nn
