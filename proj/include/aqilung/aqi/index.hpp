// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "aqilung/aqi/breakpoints.hpp"
#include "aqilung/error.hpp"

namespace aqilung::aqi {

/// Linear interpolation on the segment containing `conc`. A concentration
/// on a shared boundary belongs to the lower segment; both give the same
/// value because segments are contiguous.
inline double subindex(double conc, PollutantKind kind, const BreakpointTable& table) {
  if (std::isnan(conc) || conc < 0.0) {
    throw DomainError(std::string(pollutant_name(kind)) + " concentration must be non-negative");
  }
  const auto& segs = table.segments(kind);
  for (const auto& s : segs) {
    if (conc <= s.conc_hi) {
      return (s.index_hi - s.index_lo) / (s.conc_hi - s.conc_lo) * (conc - s.conc_lo) + s.index_lo;
    }
  }
  throw OverflowError(segs.back().index_hi, std::string(pollutant_name(kind)) + " concentration " +
                                                std::to_string(conc) + " exceeds table maximum " +
                                                std::to_string(segs.back().conc_hi));
}

using PollutantReadings = std::map<PollutantKind, double>;

struct CompositeAqi {
  double aqi = 0.0;
  PollutantKind dominant = PollutantKind::kPM25;
  /// Set when at least one reading was above its table and was clamped to 500.
  bool clamped = false;
};

enum class OverflowPolicy { kError, kClamp };

/// Maximum per-pollutant sub-index. Ties go to the earlier pollutant in
/// enumeration order.
inline CompositeAqi composite_aqi(const PollutantReadings& readings, const BreakpointTable& table,
                                  OverflowPolicy policy = OverflowPolicy::kError) {
  if (readings.empty()) throw DomainError("composite_aqi needs at least one reading");
  CompositeAqi best;
  bool first = true;
  for (PollutantKind k : kAllPollutants) {
    auto it = readings.find(k);
    if (it == readings.end()) continue;
    double value = 0.0;
    try {
      value = subindex(it->second, k, table);
    } catch (const OverflowError& e) {
      if (policy == OverflowPolicy::kError) throw;
      value = e.max_index();
      best.clamped = true;
    }
    if (first || value > best.aqi) {
      best.aqi = value;
      best.dominant = k;
      first = false;
    }
  }
  return best;
}

enum class AqiCategory { kGood, kModerate, kUnhealthySensitive, kUnhealthy, kVeryUnhealthy, kHazardous };

struct CategoryInfo {
  AqiCategory category;
  std::string_view id;
  std::string_view label;
  int index_lo;
  int index_hi;
  std::string_view color;
};

inline constexpr std::array<CategoryInfo, 6> kCategories{{
    {AqiCategory::kGood, "good", "Good", 0, 50, "#00E400"},
    {AqiCategory::kModerate, "moderate", "Moderate", 51, 100, "#FFFF00"},
    {AqiCategory::kUnhealthySensitive, "unhealthy_sensitive", "Unhealthy for Sensitive Groups", 101, 150,
     "#FF7E00"},
    {AqiCategory::kUnhealthy, "unhealthy", "Unhealthy", 151, 200, "#FF0000"},
    {AqiCategory::kVeryUnhealthy, "very_unhealthy", "Very Unhealthy", 201, 300, "#8F3F97"},
    {AqiCategory::kHazardous, "hazardous", "Hazardous", 301, 500, "#7E0023"},
}};

inline const CategoryInfo& category_info(AqiCategory c) { return kCategories[static_cast<std::size_t>(c)]; }

struct CategoryResult {
  AqiCategory category = AqiCategory::kGood;
  bool out_of_scale = false;

  friend bool operator==(const CategoryResult&, const CategoryResult&) = default;
};

/// Category of round(aqi), rounding half away from zero. Values that round
/// above 500 are Hazardous with the out-of-scale flag set.
inline CategoryResult categorize(double aqi) {
  if (std::isnan(aqi) || aqi < 0.0) throw DomainError("AQI must be non-negative");
  const double r = std::round(aqi);
  if (r > kMaxIndex) return {AqiCategory::kHazardous, true};
  for (const auto& info : kCategories) {
    if (r <= info.index_hi) return {info.category, false};
  }
  return {AqiCategory::kHazardous, true};
}

/// Fraction of positions whose predicted and true AQI fall in the same
/// category. Negative predictions are floored at 0 before categorizing.
inline double classification_accuracy(std::span<const double> pred_aqi, std::span<const double> true_aqi) {
  if (pred_aqi.size() != true_aqi.size()) throw DimensionError("classification_accuracy length mismatch");
  if (pred_aqi.empty()) throw DomainError("classification_accuracy needs at least one sample");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred_aqi.size(); ++i) {
    const double p = std::isnan(pred_aqi[i]) ? pred_aqi[i] : std::max(0.0, pred_aqi[i]);
    if (categorize(p).category == categorize(true_aqi[i]).category) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred_aqi.size());
}

}  // namespace aqilung::aqi
