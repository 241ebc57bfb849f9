// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "aqilung/csv.hpp"
#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::vision {

/// Monitoring locations, in one-hot order.
inline constexpr std::array<std::string_view, 7> kCities{
    "Tamil Nadu",
    "Mumbai",
    "Knowledge Park (Greater Noida)",
    "New Industrial Town (Faridabad)",
    "ITO (Delhi)",
    "Bengaluru",
    "Dimapur (Nagaland)",
};

inline constexpr std::size_t kMetadataDim = kCities.size() + 2 + 7;

namespace detail {

inline std::string alnum_lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace detail

/// Index into kCities. Matching ignores case and punctuation and also
/// accepts the short site name ("ITO", "Knowledge Park", "Bangalore").
inline std::optional<std::size_t> city_index(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, std::size_t>, 8> kAliases{{
      {"knowledgepark", 2},
      {"greaternoida", 2},
      {"newindustrialtown", 3},
      {"faridabad", 3},
      {"ito", 4},
      {"delhi", 4},
      {"bangalore", 5},
      {"dimapur", 6},
  }};
  const std::string key = detail::alnum_lower(name);
  if (key.empty()) return std::nullopt;
  for (std::size_t i = 0; i < kCities.size(); ++i) {
    if (detail::alnum_lower(kCities[i]) == key) return i;
  }
  for (const auto& [alias, idx] : kAliases) {
    if (alias == key) return idx;
  }
  return std::nullopt;
}

/// Calendar timestamp at hour resolution.
struct Timestamp {
  std::chrono::year_month_day date{};
  int hour = 0;

  /// 0 = Monday ... 6 = Sunday.
  unsigned weekday_index() const { return std::chrono::weekday(std::chrono::sys_days(date)).iso_encoding() - 1; }

  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:00", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()), hour);
    return buf;
  }

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// Accepts "YYYY-MM-DD HH[:MM[:SS]]" with a space or 'T' separator.
/// Minutes and seconds are read and dropped.
inline Timestamp parse_timestamp(std::string_view text) {
  const std::string s = trim(text);
  auto bad = [&](const std::string& why) {
    return ValidationError("timestamp '" + s + "': " + why, "timestamp");
  };
  auto num = [&](std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw bad("too short");
    const auto v = parse_int(std::string_view(s).substr(pos, len));
    if (!v) throw bad("expected digits at position " + std::to_string(pos));
    return static_cast<int>(*v);
  };
  if (s.size() < 13 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T')) {
    throw bad("expected YYYY-MM-DD HH[:MM[:SS]]");
  }
  const int y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2);
  if (s.size() > 13) {
    if (s[13] != ':' || (s.size() != 16 && s.size() != 19)) throw bad("expected HH:MM or HH:MM:SS");
    const int mi = num(14, 2);
    if (mi > 59) throw bad("minute out of range");
    if (s.size() == 19) {
      if (s[16] != ':') throw bad("expected HH:MM:SS");
      if (num(17, 2) > 59) throw bad("second out of range");
    }
  }
  const std::chrono::year_month_day date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                         std::chrono::day(static_cast<unsigned>(d))};
  if (!date.ok()) throw bad("not a calendar date");
  if (h < 0 || h > 23) throw bad("hour outside 0..23");
  return {date, h};
}

struct MetadataRecord {
  std::string city;
  Timestamp timestamp;
};

/// One-hot city (7), (sin 2 pi h / 24, cos 2 pi h / 24), one-hot ISO weekday
/// Monday first (7): 16 values.
inline Tensor encode_metadata(const MetadataRecord& record) {
  const auto city = city_index(record.city);
  if (!city) throw ValidationError("unknown city '" + record.city + "'", "city");
  if (record.timestamp.hour < 0 || record.timestamp.hour > 23) {
    throw ValidationError("hour outside 0..23", "timestamp");
  }
  if (!record.timestamp.date.ok()) throw ValidationError("invalid date", "timestamp");
  std::vector<double> v(kMetadataDim, 0.0);
  v[*city] = 1.0;
  const double angle = 2.0 * std::numbers::pi * record.timestamp.hour / 24.0;
  v[kCities.size()] = std::sin(angle);
  v[kCities.size() + 1] = std::cos(angle);
  v[kCities.size() + 2 + record.timestamp.weekday_index()] = 1.0;
  return Tensor::vector(std::move(v));
}

}  // namespace aqilung::vision
