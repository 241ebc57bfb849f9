// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "aqilung/dataset.hpp"

namespace aqilung::testing {

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Segment-membership oracle: p lies on the segment [lo, hi] when
/// |p - lo| + |p - hi| == |lo - hi| within tol.
inline bool on_segment(std::span<const double> p, std::span<const double> lo, std::span<const double> hi,
                       double tol) {
  return std::abs(euclid(p, lo) + euclid(p, hi) - euclid(lo, hi)) <= tol;
}

/// Checks a synthetic row against its recorded parents in `source`.
/// Interpolated rows (u > 0) must sit on [a, b]; extrapolated rows (u < 0)
/// on [a - step (b - a), a].
inline bool synthetic_row_admissible(const LabeledDataset& source, const RowOrigin& o, std::span<const double> p,
                                     double step, double tol) {
  const auto a = source.row(o.seed_row), b = source.row(o.partner_row);
  if (o.u > 0.0 && o.u < 1.0) return on_segment(p, a, b, tol);
  if (o.u < 0.0 && o.u > -step) {
    std::vector<double> end(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) end[i] = a[i] - step * (b[i] - a[i]);
    return on_segment(p, end, a, tol);
  }
  return false;
}

}  // namespace aqilung::testing
