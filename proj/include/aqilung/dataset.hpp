// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung {

/// Severity classes run 1 (least severe) to 7.
inline constexpr int kMinSeverity = 1;
inline constexpr int kMaxSeverity = 7;
inline constexpr std::size_t kSeverityClasses = 7;

enum class RowKind { kOriginal, kSynthetic };

/// Where a row came from. Synthetic rows record the affine recipe
/// features = X[seed_row] + u * (X[partner_row] - X[seed_row]),
/// with both indices referring to rows of the dataset that was resampled.
struct RowOrigin {
  RowKind kind = RowKind::kOriginal;
  std::size_t seed_row = 0;
  std::size_t partner_row = 0;
  double u = 0.0;

  friend bool operator==(const RowOrigin&, const RowOrigin&) = default;
};

struct LabeledDataset {
  Tensor features;  // [n x d]
  std::vector<int> labels;
  std::vector<RowOrigin> origins;

  LabeledDataset() = default;

  LabeledDataset(Tensor x, std::vector<int> y) : features(std::move(x)), labels(std::move(y)) {
    origins.assign(labels.size(), RowOrigin{});
    validate();
  }

  LabeledDataset(Tensor x, std::vector<int> y, std::vector<RowOrigin> o)
      : features(std::move(x)), labels(std::move(y)), origins(std::move(o)) {
    validate();
  }

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.cols(); }
  bool empty() const noexcept { return labels.empty(); }

  std::span<const double> row(std::size_t i) const { return features.row(i); }

  void validate() const {
    if (labels.empty()) {
      if (!features.empty()) throw DimensionError("dataset has features but no labels");
      return;
    }
    if (features.rank() != 2 || features.rows() != labels.size()) {
      throw DimensionError("dataset features " + shape_str(features.shape()) + " vs " +
                           std::to_string(labels.size()) + " labels");
    }
    if (origins.size() != labels.size()) throw DimensionError("dataset provenance length mismatch");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < kMinSeverity || labels[i] > kMaxSeverity) {
        throw ValidationError("row " + std::to_string(i) + ": label " + std::to_string(labels[i]) +
                                  " outside 1..7",
                              "label");
      }
    }
  }

  std::map<int, std::size_t> class_counts() const {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    return counts;
  }

  /// Rows in the given order; provenance is reset to original.
  LabeledDataset subset(std::span<const std::size_t> idx) const {
    std::vector<int> y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back(labels[i]);
    if (idx.empty()) return {};
    return LabeledDataset(gather_rows(features, idx), std::move(y));
  }

  std::vector<std::size_t> rows_of_class(int label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) out.push_back(i);
    }
    return out;
  }
};

/// Per-class target row counts.
using ResamplingPlan = std::map<int, std::size_t>;

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace aqilung
