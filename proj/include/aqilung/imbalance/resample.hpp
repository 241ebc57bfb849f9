// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/severity/svc.hpp"

namespace aqilung::imbalance {

struct SmoteParams {
  std::size_t k_neighbors = 5;
  std::size_t m_neighbors = 10;
  double extrapolation_step = 0.5;

  void validate() const {
    if (k_neighbors < 1) throw ValidationError("k_neighbors must be at least 1", "k_neighbors");
    if (m_neighbors < 1) throw ValidationError("m_neighbors must be at least 1", "m_neighbors");
    if (!(extrapolation_step > 0.0 && extrapolation_step <= 1.0)) {
      throw ValidationError("extrapolation_step must be in (0, 1]", "extrapolation_step");
    }
  }
};

/// Returns the rows of `label` to synthesize around.
using SeedSelector = std::function<std::vector<std::size_t>(const LabeledDataset&, int label)>;

/// Support vectors of a one-vs-rest RBF machine (C=1, scaled gamma). Falls
/// back to every class member when the machine keeps none of them.
inline SeedSelector svm_seed_selector(severity::SvcConfig config = {}) {
  return [config](const LabeledDataset& data, int label) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<int> signs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) signs[i] = data.labels[i] == label ? 1 : -1;
    const auto kernel = severity::resolve_kernel(config, data.features);
    const auto fit = severity::fit_binary(data, rows, signs, kernel, config, 0x100u + static_cast<unsigned>(label));
    std::vector<std::size_t> seeds;
    for (std::size_t i : fit.support_indices) {
      if (data.labels[i] == label) seeds.push_back(i);
    }
    return seeds.empty() ? data.rows_of_class(label) : seeds;
  };
}

namespace detail {

inline void check_plan_covers(const LabeledDataset& data, const ResamplingPlan& plan) {
  for (const auto& [label, count] : data.class_counts()) {
    if (!plan.contains(label)) {
      throw ValidationError("resampling plan has no target for class " + std::to_string(label), "plan");
    }
  }
  for (const auto& [label, target] : plan) {
    if (label < kMinSeverity || label > kMaxSeverity) {
      throw ValidationError("resampling plan names class " + std::to_string(label) + " outside 1..7", "plan");
    }
    if (target == 0) throw ValidationError("resampling target for class " + std::to_string(label) + " is 0", "plan");
  }
}

/// Indices of the `m` nearest rows to row `i` among `candidates` (excluding
/// `i`), distance ties to the lower index.
inline std::vector<std::size_t> nearest(const LabeledDataset& data, std::size_t i,
                                        std::span<const std::size_t> candidates, std::size_t m) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(candidates.size());
  for (std::size_t j : candidates) {
    if (j != i) d.emplace_back(squared_distance(data.row(i), data.row(j)), j);
  }
  m = std::min(m, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m), d.end());
  std::vector<std::size_t> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = d[k].second;
  return out;
}

}  // namespace detail

/// SVMSMOTE. Classes whose plan target exceeds their count grow to exactly
/// the target; other classes are untouched. Output is the input rows in
/// order followed by synthetic rows grouped by ascending class. Synthetic
/// provenance indices refer to rows of `data`.
///
/// For a seed whose m nearest neighbours are mostly its own class the new
/// point is seed + u (nb - seed), u in (0, 1), nb one of the seed's k
/// nearest same-class rows. Otherwise (strictly more than m/2 foreign
/// neighbours) the point moves away from the nearest foreign neighbour f:
/// seed + u (f - seed), u in (-step, 0).
inline LabeledDataset svmsmote_oversample(const LabeledDataset& data, const ResamplingPlan& plan,
                                          const SmoteParams& params, const SeedSelector& select_seeds,
                                          const SeededRng& rng) {
  params.validate();
  detail::check_plan_covers(data, plan);
  const auto counts = data.class_counts();

  std::vector<double> out(data.features.data().begin(), data.features.data().end());
  std::vector<int> labels = data.labels;
  std::vector<RowOrigin> origins = data.origins;
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const std::size_t d = data.dim();

  for (const auto& [label, target] : plan) {
    const auto it = counts.find(label);
    const std::size_t have = it == counts.end() ? 0 : it->second;
    if (target <= have) continue;
    if (have < params.k_neighbors + 1) {
      throw ValidationError("class " + std::to_string(label) + " has " + std::to_string(have) +
                                " rows; oversampling needs k_neighbors + 1 = " +
                                std::to_string(params.k_neighbors + 1),
                            "k_neighbors");
    }
    const auto members = data.rows_of_class(label);
    const auto seeds = select_seeds(data, label);
    if (seeds.empty()) throw ValidationError("no seeds for class " + std::to_string(label), "plan");
    SeededRng stream = rng.derive(static_cast<std::uint64_t>(label));

    struct SeedInfo {
      bool computed = false;
      bool danger = false;
      std::size_t foreign = 0;
      std::vector<std::size_t> same;
    };
    std::vector<SeedInfo> info(seeds.size());

    for (std::size_t s = 0; s < target - have; ++s) {
      const std::size_t pick = stream.below(seeds.size());
      const std::size_t seed = seeds[pick];
      if (data.labels[seed] != label) throw ValidationError("seed row has the wrong class", "plan");
      SeedInfo& si = info[pick];
      if (!si.computed) {
        const auto nb = detail::nearest(data, seed, all, params.m_neighbors);
        std::size_t foreign = 0;
        for (std::size_t j : nb) {
          if (data.labels[j] != label) {
            if (foreign == 0) si.foreign = j;
            ++foreign;
          }
        }
        si.danger = 2 * foreign > nb.size();
        si.same = detail::nearest(data, seed, members, params.k_neighbors);
        si.computed = true;
      }
      RowOrigin origin{RowKind::kSynthetic, seed, 0, 0.0};
      if (si.danger) {
        origin.partner_row = si.foreign;
        origin.u = -params.extrapolation_step * stream.uniform_open();
      } else {
        origin.partner_row = si.same[stream.below(si.same.size())];
        origin.u = stream.uniform_open();
      }
      const auto a = data.row(origin.seed_row), b = data.row(origin.partner_row);
      for (std::size_t j = 0; j < d; ++j) out.push_back(a[j] + origin.u * (b[j] - a[j]));
      labels.push_back(label);
      origins.push_back(origin);
    }
  }
  const std::size_t n = labels.size();
  return LabeledDataset(Tensor({n, d}, std::move(out)), std::move(labels), std::move(origins));
}

/// Per class above target, keeps a uniform random subset of exactly `target`
/// rows drawn without replacement; survivors keep their relative order.
inline LabeledDataset random_undersample(const LabeledDataset& data, const ResamplingPlan& plan,
                                         const SeededRng& rng) {
  detail::check_plan_covers(data, plan);
  std::vector<bool> keep(data.size(), true);
  for (const auto& [label, count] : data.class_counts()) {
    const std::size_t target = plan.at(label);
    if (target > count) {
      throw ValidationError("undersampling target " + std::to_string(target) + " exceeds " + std::to_string(count) +
                                " rows of class " + std::to_string(label),
                            "plan");
    }
    if (target == count) continue;
    auto rows = data.rows_of_class(label);
    SeededRng stream = rng.derive(0x200u + static_cast<unsigned>(label));
    stream.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = target; i < rows.size(); ++i) keep[rows[i]] = false;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keep[i]) idx.push_back(i);
  }
  if (idx.size() == data.size()) return data;
  std::vector<int> labels;
  std::vector<RowOrigin> origins;
  for (std::size_t i : idx) {
    labels.push_back(data.labels[i]);
    origins.push_back(data.origins[i]);
  }
  return LabeledDataset(gather_rows(data.features, idx), std::move(labels), std::move(origins));
}

/// Oversamples classes below target, then undersamples classes above it.
/// Synthetic provenance indices refer to rows of `data`.
inline LabeledDataset resample_pipeline(const LabeledDataset& data, const ResamplingPlan& plan,
                                        const SmoteParams& params, const SeededRng& rng,
                                        const SeedSelector& select_seeds = svm_seed_selector()) {
  detail::check_plan_covers(data, plan);
  ResamplingPlan grow, shrink;
  const auto counts = data.class_counts();
  for (const auto& [label, count] : counts) {
    const std::size_t target = plan.at(label);
    grow[label] = std::max(target, count);
    shrink[label] = target;
  }
  for (const auto& [label, target] : plan) {
    if (!counts.contains(label)) {
      throw ValidationError("plan asks for class " + std::to_string(label) + " which has no rows", "plan");
    }
  }
  const auto grown = svmsmote_oversample(data, grow, params, select_seeds, rng.derive(1));
  return random_undersample(grown, shrink, rng.derive(2));
}

/// Splits `total` as evenly as possible over `classes`; earlier classes get
/// the remainder (1550 over 1..7 gives 222 x 3 and 221 x 4).
inline ResamplingPlan even_plan(std::span<const int> classes, std::size_t total) {
  if (classes.empty()) throw ValidationError("even plan needs at least one class", "plan");
  ResamplingPlan plan;
  const std::size_t base = total / classes.size(), extra = total % classes.size();
  for (std::size_t i = 0; i < classes.size(); ++i) plan[classes[i]] = base + (i < extra ? 1 : 0);
  return plan;
}

}  // namespace aqilung::imbalance
