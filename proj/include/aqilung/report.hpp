// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace aqilung {

/// One row of the accuracy table. Accuracies are fractions in [0, 1].
struct ModelScore {
  std::string model;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct RegressionScore {
  double mse = 0.0;
  double r2 = 0.0;
};

struct EvalSummary {
  std::vector<ModelScore> models;
  std::optional<RegressionScore> regression;
};

/// Fraction to a percentage with one decimal, e.g. 0.984 -> "98.4%".
inline std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Plain-text table: model, train accuracy, test accuracy; then MSE and R2
/// lines when a regression score is present.
inline std::string render_report(const EvalSummary& s) {
  if (s.models.empty() && !s.regression) return "no models to report\n";
  std::string out;
  if (s.models.empty()) {
    out += "no models to report\n";
  } else {
    std::size_t w = 5;
    for (const auto& m : s.models) w = std::max(w, m.model.size());
    auto pad = [](std::string v, std::size_t n) {
      v.resize(std::max(v.size(), n), ' ');
      return v;
    };
    out += pad("Model", w) + "  Train accuracy  Test accuracy\n";
    for (const auto& m : s.models) {
      out += pad(m.model, w) + "  " + pad(format_percent(m.train_accuracy), 14) + "  " +
             format_percent(m.test_accuracy) + "\n";
    }
  }
  if (s.regression) {
    out += "MSE: " + format_fixed(s.regression->mse, 2) + "\n";
    out += "R2: " + format_fixed(s.regression->r2, 2) + "\n";
  }
  return out;
}

/// Same content as render_report, machine-readable. Percentages keep the
/// one-decimal text alongside the raw fraction.
inline nlohmann::ordered_json report_json(const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : s.models) {
    j["models"].push_back({{"model", m.model},
                           {"train_accuracy", m.train_accuracy},
                           {"test_accuracy", m.test_accuracy},
                           {"train_accuracy_text", format_percent(m.train_accuracy)},
                           {"test_accuracy_text", format_percent(m.test_accuracy)}});
  }
  if (s.regression) j["regression"] = {{"mse", s.regression->mse}, {"r2", s.regression->r2}};
  return j;
}

}  // namespace aqilung
