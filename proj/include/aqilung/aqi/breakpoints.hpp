// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aqilung/checksum.hpp"
#include "aqilung/csv.hpp"
#include "aqilung/error.hpp"

namespace aqilung::aqi {

enum class PollutantKind { kPM25, kPM10, kO3, kCO, kSO2, kNO2 };

inline constexpr std::array<PollutantKind, 6> kAllPollutants{
    PollutantKind::kPM25, PollutantKind::kPM10, PollutantKind::kO3,
    PollutantKind::kCO,   PollutantKind::kSO2,  PollutantKind::kNO2};

inline constexpr std::string_view pollutant_name(PollutantKind k) {
  switch (k) {
    case PollutantKind::kPM25: return "PM2.5";
    case PollutantKind::kPM10: return "PM10";
    case PollutantKind::kO3: return "O3";
    case PollutantKind::kCO: return "CO";
    case PollutantKind::kSO2: return "SO2";
    case PollutantKind::kNO2: return "NO2";
  }
  return "?";
}

/// Accepts the canonical names case-insensitively, plus "PM25".
inline std::optional<PollutantKind> parse_pollutant(std::string_view name) {
  const std::string n = lower(trim(name));
  if (n == "pm25") return PollutantKind::kPM25;
  for (PollutantKind k : kAllPollutants) {
    if (n == lower(pollutant_name(k))) return k;
  }
  return std::nullopt;
}

struct BreakpointSegment {
  double conc_lo = 0.0;
  double conc_hi = 0.0;
  double index_lo = 0.0;
  double index_hi = 0.0;
  std::string units;
  std::string averaging_period;
};

inline constexpr double kMaxIndex = 500.0;

/// Per-pollutant piecewise-linear breakpoints covering index 0..500.
class BreakpointTable {
 public:
  BreakpointTable() = default;

  BreakpointTable(std::string scheme, std::map<PollutantKind, std::vector<BreakpointSegment>> segments)
      : scheme_(std::move(scheme)), segments_(std::move(segments)) {
    validate();
  }

  const std::string& scheme() const noexcept { return scheme_; }

  const std::vector<BreakpointSegment>& segments(PollutantKind k) const {
    auto it = segments_.find(k);
    if (it == segments_.end()) {
      throw DomainError("breakpoint table has no segments for " + std::string(pollutant_name(k)));
    }
    return it->second;
  }

  bool covers(PollutantKind k) const { return segments_.count(k) != 0; }

  double max_concentration(PollutantKind k) const { return segments(k).back().conc_hi; }

 private:
  void validate() const {
    if (segments_.empty()) throw ValidationError("breakpoint table is empty");
    for (const auto& [kind, segs] : segments_) {
      const std::string name(pollutant_name(kind));
      if (segs.empty()) throw ValidationError("no segments for " + name);
      if (segs.front().conc_lo != 0.0 || segs.front().index_lo != 0.0) {
        throw ValidationError(name + ": first segment must start at concentration 0, index 0");
      }
      if (segs.back().index_hi != kMaxIndex) {
        throw ValidationError(name + ": last segment must end at index 500");
      }
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        if (!(s.conc_lo < s.conc_hi) || !(s.index_lo < s.index_hi)) {
          throw ValidationError(name + ": segment " + std::to_string(i) + " is empty or inverted");
        }
        if (i > 0 && (segs[i - 1].conc_hi != s.conc_lo || segs[i - 1].index_hi != s.index_lo)) {
          throw ValidationError(name + ": segment " + std::to_string(i) +
                                " is not contiguous with its predecessor");
        }
      }
    }
  }

  std::string scheme_;
  std::map<PollutantKind, std::vector<BreakpointSegment>> segments_;
};

/// SHA-256 of the shipped data/breakpoints/us_epa.csv.
inline constexpr std::string_view kUsEpaTableSha256 =
    "60a2dde578be7ac9d10a407fee1ddd6cea62e2b7ccf12e8d99c664926afb6c14";

/// Parses the breakpoint CSV format:
/// scheme,pollutant,conc_lo,conc_hi,index_lo,index_hi,units,averaging_period
inline BreakpointTable parse_breakpoint_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  const CsvTable csv = parse_csv(in);
  const std::size_t c_scheme = csv.require("scheme"), c_pol = csv.require("pollutant"),
                    c_clo = csv.require("conc_lo"), c_chi = csv.require("conc_hi"),
                    c_ilo = csv.require("index_lo"), c_ihi = csv.require("index_hi"),
                    c_units = csv.require("units"), c_avg = csv.require("averaging_period");
  std::string scheme;
  std::map<PollutantKind, std::vector<BreakpointSegment>> segments;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const std::size_t line = csv.lines[r];
    if (scheme.empty()) scheme = row[c_scheme];
    if (row[c_scheme] != scheme) throw ParseError(line, "scheme", "mixed schemes in one table");
    auto kind = parse_pollutant(row[c_pol]);
    if (!kind) throw ParseError(line, "pollutant", "unknown pollutant '" + row[c_pol] + "'");
    auto number = [&](std::size_t col, const char* name) {
      auto v = parse_double(row[col]);
      if (!v || !std::isfinite(*v)) throw ParseError(line, name, "not a number: '" + row[col] + "'");
      return *v;
    };
    segments[*kind].push_back({number(c_clo, "conc_lo"), number(c_chi, "conc_hi"),
                               number(c_ilo, "index_lo"), number(c_ihi, "index_hi"), row[c_units],
                               row[c_avg]});
  }
  return BreakpointTable(scheme, std::move(segments));
}

/// Loads a breakpoint file, optionally verifying its pinned SHA-256.
inline BreakpointTable load_breakpoint_table(const std::string& path,
                                             std::optional<std::string_view> expected_sha256 = {}) {
  const std::string text = read_text_file(path);
  if (expected_sha256 && !expected_sha256->empty()) {
    const std::string actual = sha256_hex(text);
    if (actual != *expected_sha256) {
      throw ChecksumError(path + ": breakpoint table checksum " + actual + " does not match pinned " +
                          std::string(*expected_sha256));
    }
  }
  return parse_breakpoint_table(text);
}

#ifdef AQILUNG_DATA_DIR
inline std::string default_breakpoint_path() { return std::string(AQILUNG_DATA_DIR) + "/breakpoints/us_epa.csv"; }
#endif

}  // namespace aqilung::aqi
