// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/severity/svm.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::severity {

struct SvcConfig {
  KernelSpec::Kind kernel = KernelSpec::Kind::kRbf;
  /// Unset means 1 / (d * var(X)) over all training entries.
  std::optional<double> gamma;
  double c = 1.0;
  double tol = 1e-3;
  std::size_t max_passes = 0;
  std::uint64_t seed = 0;
};

/// Machine for the pair (positive, negative); f >= 0 votes positive.
struct PairMachine {
  int positive = 0;
  int negative = 0;
  BinarySvm svm;
};

struct SvcModel {
  std::vector<int> classes;
  std::vector<PairMachine> machines;
  SvcConfig config;
  std::size_t dim = 0;
};

/// gamma = 1 / (d * var) with var the population variance of every entry of x.
inline double scale_gamma(const Tensor& x) {
  const auto v = x.data();
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(v.size());
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

inline KernelSpec resolve_kernel(const SvcConfig& config, const Tensor& x) {
  if (config.kernel == KernelSpec::Kind::kLinear) return KernelSpec::linear();
  return KernelSpec::rbf(config.gamma ? *config.gamma : scale_gamma(x));
}

namespace detail {

/// Rows of a class pair in a canonical order (label, then features), so the
/// solver sees the same problem whatever the input row order.
inline std::vector<std::size_t> canonical_pair_rows(const LabeledDataset& data, int a, int b) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels[i] == a || data.labels[i] == b) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) {
    if (data.labels[l] != data.labels[r]) return data.labels[l] < data.labels[r];
    const auto xl = data.row(l), xr = data.row(r);
    return std::lexicographical_compare(xl.begin(), xl.end(), xr.begin(), xr.end());
  });
  return idx;
}

}  // namespace detail

/// Binary machine of one class against another set of labels; used both by
/// one-vs-one fitting and by one-vs-rest seed selection during oversampling.
inline SmoResult fit_binary(const LabeledDataset& data, std::span<const std::size_t> rows,
                            std::span<const int> signs, const KernelSpec& kernel, const SvcConfig& config,
                            std::uint64_t stream) {
  Tensor x = gather_rows(data.features, rows);
  SeededRng rng = SeededRng(config.seed).derive(stream);
  return smo_train_binary(x, signs, kernel, SmoConfig{config.c, config.tol, config.max_passes}, rng);
}

/// One-vs-one SVC: one SMO machine per unordered class pair, each trained on
/// that pair's rows with a seed derived from (seed, pair).
inline SvcModel svc_fit(const LabeledDataset& data, const SvcConfig& config = {}) {
  if (data.empty()) throw DomainError("svc_fit: empty dataset");
  SvcModel model;
  model.config = config;
  model.dim = data.dim();
  for (const auto& [label, count] : data.class_counts()) model.classes.push_back(label);
  if (model.classes.size() < 2) throw DomainError("svc_fit: at least two classes are required");
  const KernelSpec kernel = resolve_kernel(config, data.features);
  model.config.gamma = kernel.kind == KernelSpec::Kind::kRbf ? std::optional<double>(kernel.gamma) : std::nullopt;

  for (std::size_t i = 0; i < model.classes.size(); ++i) {
    for (std::size_t j = i + 1; j < model.classes.size(); ++j) {
      const int a = model.classes[i], b = model.classes[j];
      const auto rows = detail::canonical_pair_rows(data, a, b);
      std::vector<int> signs;
      signs.reserve(rows.size());
      for (std::size_t r : rows) signs.push_back(data.labels[r] == a ? 1 : -1);
      const auto stream = static_cast<std::uint64_t>(a * 16 + b);
      try {
        auto fit = fit_binary(data, rows, signs, kernel, config, stream);
        model.machines.push_back({a, b, std::move(fit.machine)});
      } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.worst_violation(), "svc pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                                        "): " + e.what());
      }
    }
  }
  return model;
}

/// Picks the class with the most votes; ties go to the larger summed |f|, then
/// to the smallest label. Index c of both arrays belongs to class c.
inline int resolve_votes(std::span<const std::size_t> votes, std::span<const double> magnitude,
                         std::span<const int> classes) {
  int best = classes.front();
  for (int c : classes) {
    const auto ci = static_cast<std::size_t>(c), bi = static_cast<std::size_t>(best);
    if (votes[ci] > votes[bi] || (votes[ci] == votes[bi] && magnitude[ci] > magnitude[bi])) best = c;
  }
  return best;
}

inline int svc_predict(const SvcModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw DimensionError("svc query has " + std::to_string(x.size()) + " features, model has " +
                         std::to_string(model.dim));
  }
  std::array<std::size_t, kSeverityClasses + 1> votes{};
  std::array<double, kSeverityClasses + 1> magnitude{};
  for (const auto& m : model.machines) {
    const double f = m.svm.decision(x);
    const int winner = f >= 0.0 ? m.positive : m.negative;
    ++votes[static_cast<std::size_t>(winner)];
    magnitude[static_cast<std::size_t>(winner)] += std::abs(f);
  }
  return resolve_votes(votes, magnitude, model.classes);
}

inline int predict(const SvcModel& model, std::span<const double> x) { return svc_predict(model, x); }

}  // namespace aqilung::severity
