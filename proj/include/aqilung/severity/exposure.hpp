// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "aqilung/error.hpp"

namespace aqilung::severity {

/// Bucket map from AQI onto the patient data's 1..8 air-pollution scale.
/// Level is 1 + the number of upper bounds strictly below the AQI.
struct ExposureMap {
  std::vector<double> upper_bounds{50, 100, 150, 200, 250, 300, 400};

  void validate() const {
    if (upper_bounds.size() != 7) throw ValidationError("exposure map needs 7 upper bounds", "exposure.upper_bounds");
    for (std::size_t i = 0; i < upper_bounds.size(); ++i) {
      if (!std::isfinite(upper_bounds[i]) || upper_bounds[i] < 0.0 ||
          (i > 0 && !(upper_bounds[i] > upper_bounds[i - 1]))) {
        throw ValidationError("exposure upper bounds must be finite, non-negative and increasing",
                              "exposure.upper_bounds");
      }
    }
  }
};

inline int aqi_to_exposure(double aqi, const ExposureMap& map = {}) {
  if (std::isnan(aqi) || aqi < 0.0) throw DomainError("aqi_to_exposure: aqi must be non-negative");
  int level = 1;
  for (double bound : map.upper_bounds) {
    if (aqi > bound) ++level;
  }
  return level;
}

}  // namespace aqilung::severity
