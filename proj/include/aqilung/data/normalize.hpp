// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::data {

/// Per-feature min/max from training data. Constant features map to 0.
struct NormalizationSpec {
  std::vector<double> mins;
  std::vector<double> maxs;

  std::size_t dim() const noexcept { return mins.size(); }
  bool constant(std::size_t j) const { return !(maxs[j] > mins[j]); }

  void validate() const {
    if (mins.empty() || mins.size() != maxs.size()) throw DimensionError("normalization spec min/max length mismatch");
    for (std::size_t j = 0; j < mins.size(); ++j) {
      if (!std::isfinite(mins[j]) || !std::isfinite(maxs[j]) || maxs[j] < mins[j]) {
        throw DomainError("normalization spec has a bad range at feature " + std::to_string(j));
      }
    }
  }

  double apply(std::size_t j, double v) const { return constant(j) ? 0.0 : (v - mins[j]) / (maxs[j] - mins[j]); }
  double invert(std::size_t j, double v) const { return constant(j) ? mins[j] : mins[j] + v * (maxs[j] - mins[j]); }

  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != dim()) {
      throw DimensionError("row has " + std::to_string(row.size()) + " features, spec expects " + std::to_string(dim()));
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = apply(j, row[j]);
    return out;
  }

  Tensor apply(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != dim()) throw DimensionError("matrix width does not match normalization spec");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = apply(j, x(i, j));
    }
    return out;
  }

  Tensor denormalize(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != dim()) throw DimensionError("matrix width does not match normalization spec");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = invert(j, x(i, j));
    }
    return out;
  }

  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

inline NormalizationSpec fit_normalization(const Tensor& x) {
  if (x.rank() != 2 || x.rows() == 0) throw DomainError("normalization needs a non-empty matrix");
  NormalizationSpec spec{std::vector<double>(x.cols()), std::vector<double>(x.cols())};
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double lo = x(0, j), hi = x(0, j);
    for (std::size_t i = 1; i < x.rows(); ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    spec.mins[j] = lo;
    spec.maxs[j] = hi;
  }
  spec.validate();
  return spec;
}

struct NormalizedDataset {
  LabeledDataset data;
  NormalizationSpec spec;
};

/// Min-max scales every feature to [0, 1] with statistics from `data`.
inline NormalizedDataset normalize_features(const LabeledDataset& data) {
  if (data.size() == 0) throw DomainError("cannot normalize an empty dataset");
  auto spec = fit_normalization(data.features);
  return {LabeledDataset(spec.apply(data.features), data.labels, data.origins), std::move(spec)};
}

/// Z-scores columns; used for the regressor's inputs and targets. A column
/// with zero variance gets scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  std::size_t dim() const noexcept { return mean.size(); }

  static Standardizer fit(const Tensor& x) {
    if (x.rank() != 2 || x.rows() == 0) throw DomainError("standardizer needs a non-empty matrix");
    Standardizer s{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 0.0)};
    const double n = static_cast<double>(x.rows());
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) sum += x(i, j);
      const double mu = sum / n;
      double ss = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mu) * (x(i, j) - mu);
      const double sd = std::sqrt(ss / n);
      s.mean[j] = mu;
      s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  void validate() const {
    if (mean.empty() || mean.size() != scale.size()) throw DimensionError("standardizer mean/scale length mismatch");
    for (std::size_t j = 0; j < mean.size(); ++j) {
      if (!std::isfinite(mean[j]) || !(scale[j] > 0.0) || !std::isfinite(scale[j])) {
        throw DomainError("standardizer has a bad entry at column " + std::to_string(j));
      }
    }
  }

  Tensor transform(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != dim()) throw DimensionError("matrix width does not match standardizer");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
    }
    return out;
  }

  Tensor inverse(const Tensor& x) const {
    if (x.rank() != 2 || x.cols() != dim()) throw DimensionError("matrix width does not match standardizer");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = x(i, j) * scale[j] + mean[j];
    }
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace aqilung::data
