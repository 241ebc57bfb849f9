// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"

namespace aqilung::data {

struct SplitConfig {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded Fisher-Yates shuffle of 0..n-1, cut at floor(n (1 - test_fraction)).
inline SplitIndices split_indices(std::size_t n, const SplitConfig& config) {
  if (n < 2) throw DomainError("split needs at least 2 records, got " + std::to_string(n));
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw DomainError("test_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  SeededRng rng(config.seed);
  rng.shuffle(std::span<std::size_t>(idx));
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - config.test_fraction)));
  if (cut == 0 || cut == n) {
    throw DomainError("split of " + std::to_string(n) + " records leaves an empty partition");
  }
  return {{idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)},
          {idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end()}};
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& records, const SplitConfig& config) {
  const auto s = split_indices(records.size(), config);
  std::pair<std::vector<T>, std::vector<T>> out;
  for (std::size_t i : s.train) out.first.push_back(records[i]);
  for (std::size_t i : s.test) out.second.push_back(records[i]);
  return out;
}

}  // namespace aqilung::data
