// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"

namespace aqilung::severity {

using ConfusionMatrix = std::array<std::array<std::size_t, kSeverityClasses>, kSeverityClasses>;

/// confusion[truth - 1][predicted - 1].
struct EvalReport {
  double accuracy = 0.0;
  ConfusionMatrix confusion{};
  std::size_t total = 0;

  std::size_t correct() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < kSeverityClasses; ++i) t += confusion[i][i];
    return t;
  }
};

inline EvalReport evaluate_predictions(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("evaluate: prediction and truth lengths differ");
  if (truth.empty()) throw DomainError("evaluate: empty data");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int v : {predicted[i], truth[i]}) {
      if (v < kMinSeverity || v > kMaxSeverity) throw DomainError("evaluate: label " + std::to_string(v) + " outside 1..7");
    }
    ++r.confusion[static_cast<std::size_t>(truth[i] - 1)][static_cast<std::size_t>(predicted[i] - 1)];
  }
  r.total = truth.size();
  r.accuracy = static_cast<double>(r.correct()) / static_cast<double>(r.total);
  return r;
}

/// Any model with a `predict(model, row)` overload.
template <typename Model>
EvalReport evaluate(const Model& model, const LabeledDataset& data) {
  if (data.empty()) throw DomainError("evaluate: empty data");
  std::vector<int> predicted(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) predicted[i] = predict(model, data.row(i));
  return evaluate_predictions(predicted, data.labels);
}

}  // namespace aqilung::severity
