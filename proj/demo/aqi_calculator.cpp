// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

// Composite AQI from pollutant readings given as NAME=VALUE arguments,
// e.g. `aqi_calculator PM2.5=35.4 O3=0.071 NO2=120`.

#include <cstdio>
#include <exception>
#include <string>

#include "aqilung/aqi/breakpoints.hpp"
#include "aqilung/aqi/index.hpp"

int main(int argc, char** argv) {
  using namespace aqilung::aqi;
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s NAME=VALUE...  (PM2.5 PM10 O3 CO SO2 NO2)\n", argv[0]);
    return 2;
  }
  try {
    const auto table = load_breakpoint_table(default_breakpoint_path());
    PollutantReadings readings;
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      const auto eq = arg.find('=');
      const auto kind = eq == std::string::npos ? std::nullopt : parse_pollutant(arg.substr(0, eq));
      if (!kind) {
        std::fprintf(stderr, "bad reading '%s'\n", arg.c_str());
        return 2;
      }
      readings[*kind] = std::stod(arg.substr(eq + 1));
    }
    for (const auto& [kind, conc] : readings) {
      std::printf("%-6s %10.3f  sub-index %6.1f\n", std::string(pollutant_name(kind)).c_str(), conc,
                  subindex(conc, kind, table));
    }
    const auto c = composite_aqi(readings, table, OverflowPolicy::kClamp);
    const auto cat = categorize(c.aqi);
    std::printf("AQI %.0f (%s), dominant %s%s\n", c.aqi, std::string(category_info(cat.category).label).c_str(),
                std::string(pollutant_name(c.dominant)).c_str(), c.clamped ? ", clamped at 500" : "");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
