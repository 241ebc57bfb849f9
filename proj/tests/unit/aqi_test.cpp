// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "aqilung/aqi/index.hpp"
#include "aqilung/rng.hpp"
#include "support/epa_oracle.hpp"

namespace aqilung::aqi {
namespace {

const BreakpointTable& table() {
  static const BreakpointTable t = load_breakpoint_table(default_breakpoint_path(), kUsEpaTableSha256);
  return t;
}

TEST(BreakpointTable, ShippedFileVerifiesAndCoversAllPollutants) {
  EXPECT_EQ(table().scheme(), "us_epa");
  for (PollutantKind k : kAllPollutants) EXPECT_TRUE(table().covers(k));
}

TEST(BreakpointTable, ChecksumMismatchIsRejected) {
  EXPECT_THROW(load_breakpoint_table(default_breakpoint_path(), "00"), ChecksumError);
}

TEST(BreakpointTable, RejectsGapsAndBadRows) {
  const std::string head = "scheme,pollutant,conc_lo,conc_hi,index_lo,index_hi,units,averaging_period\n";
  EXPECT_THROW(parse_breakpoint_table(head + "x,PM10,0,10,0,50,u,1h\nx,PM10,11,20,51,500,u,1h\n"),
               ValidationError);
  EXPECT_THROW(parse_breakpoint_table(head + "x,PM10,0,10,0,400,u,1h\n"), ValidationError);
  EXPECT_THROW(parse_breakpoint_table(head + "x,XYZ,0,10,0,500,u,1h\n"), ParseError);
  EXPECT_THROW(parse_breakpoint_table(head + "x,PM10,0,ten,0,500,u,1h\n"), ParseError);
  EXPECT_NO_THROW(parse_breakpoint_table(head + "x,PM10,0,10,0,500,u,1h\n"));
}

TEST(Subindex, SegmentEndpointsAndMidpoints) {
  for (PollutantKind k : kAllPollutants) {
    for (const auto& s : table().segments(k)) {
      EXPECT_EQ(subindex(s.conc_lo, k, table()), s.index_lo);
      EXPECT_NEAR(subindex(0.5 * (s.conc_lo + s.conc_hi), k, table()), 0.5 * (s.index_lo + s.index_hi),
                  1e-9);
    }
  }
}

TEST(Subindex, GoodModerateBoundaryForPm25) {
  EXPECT_EQ(subindex(9.0, PollutantKind::kPM25, table()), 50.0);
  EXPECT_EQ(categorize(subindex(9.0, PollutantKind::kPM25, table())).category, AqiCategory::kGood);
  EXPECT_EQ(categorize(subindex(9.1, PollutantKind::kPM25, table())).category, AqiCategory::kModerate);
}

TEST(Subindex, MatchesPublishedTableOracle) {
  for (const auto& p : testing::epa_published_table()) {
    const PollutantKind k = *parse_pollutant(p.name);
    for (const auto& r : p.rows) {
      for (double c : {r.c_lo, r.c_hi, 0.5 * (r.c_lo + r.c_hi)}) {
        EXPECT_EQ(subindex(c, k, table()), *testing::epa_lookup(p, c)) << p.name << " at " << c;
      }
    }
  }
}

TEST(Subindex, Errors) {
  EXPECT_THROW(subindex(-1.0, PollutantKind::kCO, table()), DomainError);
  try {
    subindex(700.0, PollutantKind::kPM10, table());
    FAIL();
  } catch (const OverflowError& e) {
    EXPECT_EQ(e.max_index(), 500.0);
  }
}

TEST(Subindex, MonotoneAndContinuous) {
  for (PollutantKind k : kAllPollutants) {
    const auto& segs = table().segments(k);
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
      EXPECT_EQ(subindex(segs[i].conc_hi, k, table()), segs[i + 1].index_lo);
    }
    const double top = table().max_concentration(k);
    double prev = -1.0;
    for (int step = 0; step <= 4000; ++step) {
      const double v = subindex(top * step / 4000.0, k, table());
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Categorize, BandsAndRounding) {
  EXPECT_EQ(categorize(0).category, AqiCategory::kGood);
  EXPECT_EQ(categorize(150.4).category, AqiCategory::kUnhealthySensitive);
  EXPECT_EQ(categorize(150.6).category, AqiCategory::kUnhealthy);
  EXPECT_EQ(categorize(50.5).category, AqiCategory::kModerate);
  EXPECT_EQ(categorize(500).category, AqiCategory::kHazardous);
  EXPECT_FALSE(categorize(500.4).out_of_scale);
  auto r = categorize(612);
  EXPECT_EQ(r.category, AqiCategory::kHazardous);
  EXPECT_TRUE(r.out_of_scale);
  EXPECT_THROW(categorize(-0.1), DomainError);
}

TEST(Categorize, BandsPartitionZeroToFiveHundred) {
  int expected_lo = 0;
  for (const auto& c : kCategories) {
    EXPECT_EQ(c.index_lo, expected_lo);
    for (int v = c.index_lo; v <= c.index_hi; ++v) EXPECT_EQ(categorize(v).category, c.category);
    expected_lo = c.index_hi + 1;
  }
  EXPECT_EQ(expected_lo, 501);
}

TEST(Categorize, NeverSkipsACategoryAsConcentrationRises) {
  for (PollutantKind k : kAllPollutants) {
    const double top = table().max_concentration(k);
    int prev = 0;
    for (int step = 0; step <= 20000; ++step) {
      const int c = static_cast<int>(categorize(subindex(top * step / 20000.0, k, table())).category);
      EXPECT_LE(c - prev, 1);
      prev = c;
    }
    EXPECT_EQ(prev, static_cast<int>(AqiCategory::kHazardous));
  }
}

TEST(CompositeAqi, SingleAndMax) {
  PollutantReadings one{{PollutantKind::kPM25, 20.0}};
  auto c = composite_aqi(one, table());
  EXPECT_EQ(c.aqi, subindex(20.0, PollutantKind::kPM25, table()));
  EXPECT_EQ(c.dominant, PollutantKind::kPM25);

  // PM10 at 27 ug/m3 -> 25; O3 at 0.0622 ppm lands in Moderate.
  PollutantReadings two{{PollutantKind::kPM10, 27.0}, {PollutantKind::kO3, 0.0622}};
  auto m = composite_aqi(two, table());
  EXPECT_EQ(m.dominant, PollutantKind::kO3);
  EXPECT_EQ(m.aqi, subindex(0.0622, PollutantKind::kO3, table()));
  EXPECT_THROW(composite_aqi({}, table()), DomainError);
}

TEST(CompositeAqi, TieGoesToEarlierPollutant) {
  // Both exactly at the top of their first segment: index 50.
  PollutantReadings r{{PollutantKind::kNO2, 53.0}, {PollutantKind::kPM10, 54.0}};
  EXPECT_EQ(composite_aqi(r, table()).dominant, PollutantKind::kPM10);
}

TEST(CompositeAqi, OverflowPolicy) {
  PollutantReadings r{{PollutantKind::kCO, 80.0}, {PollutantKind::kPM25, 5.0}};
  EXPECT_THROW(composite_aqi(r, table()), OverflowError);
  auto c = composite_aqi(r, table(), OverflowPolicy::kClamp);
  EXPECT_EQ(c.aqi, 500.0);
  EXPECT_TRUE(c.clamped);
  EXPECT_EQ(c.dominant, PollutantKind::kCO);
}

TEST(ClassificationAccuracy, Cases) {
  std::vector<double> t{10, 75, 120, 180};
  EXPECT_EQ(classification_accuracy(t, t), 1.0);
  std::vector<double> shifted{60, 125, 170, 250};
  EXPECT_EQ(classification_accuracy(shifted, t), 0.0);
  std::vector<double> three{12, 80, 160, 190};
  EXPECT_EQ(classification_accuracy(three, t), 0.75);
  EXPECT_THROW(classification_accuracy(std::vector<double>{1}, t), DimensionError);
}

}  // namespace
}  // namespace aqilung::aqi
