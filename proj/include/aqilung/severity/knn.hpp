// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"

namespace aqilung::severity {

/// Lazy k-nearest-neighbour classifier over Euclidean distance.
struct KnnModel {
  std::size_t k = 5;
  Tensor points;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const { return points.cols(); }
};

inline KnnModel knn_fit(const LabeledDataset& data, std::size_t k = 5) {
  if (k == 0) throw DomainError("knn k must be at least 1");
  if (k > data.size()) {
    throw DomainError("knn k=" + std::to_string(k) + " exceeds dataset size " + std::to_string(data.size()));
  }
  return {k, data.features, data.labels};
}

/// Indices of the k nearest rows; distance ties resolved by lower row index.
inline std::vector<std::size_t> knn_neighbors(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) {
    throw DimensionError("knn query has " + std::to_string(x.size()) + " features, model has " +
                         std::to_string(model.dim()));
  }
  std::vector<std::pair<double, std::size_t>> dist(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) dist[i] = {squared_distance(model.points.row(i), x), i};
  const auto k = static_cast<std::ptrdiff_t>(model.k);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<std::size_t> out(model.k);
  for (std::size_t i = 0; i < model.k; ++i) out[i] = dist[i].second;
  return out;
}

/// Majority label among the k nearest rows; vote ties go to the smallest label.
inline int knn_predict(const KnnModel& model, std::span<const double> x) {
  std::array<std::size_t, kSeverityClasses + 1> votes{};
  for (std::size_t i : knn_neighbors(model, x)) ++votes[static_cast<std::size_t>(model.labels[i])];
  int best = kMinSeverity;
  for (int c = kMinSeverity; c <= kMaxSeverity; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

inline int predict(const KnnModel& model, std::span<const double> x) { return knn_predict(model, x); }

}  // namespace aqilung::severity
