// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "aqilung/data/air.hpp"
#include "aqilung/data/normalize.hpp"
#include "aqilung/data/patient.hpp"
#include "aqilung/data/split.hpp"
#include "support/tempdir.hpp"

namespace aqilung::data {
namespace {

using testing_support::TempDir;
using testing_support::write_bytes;
using testing_support::write_text;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

constexpr const char* kAirHeader = "filename,city,country,timestamp,AQI,PM2.5,PM10,O3,CO,SO2,NO2\n";

void write_image(const std::filesystem::path& p, std::uint8_t shade) {
  write_bytes(p, vision::encode_png(vision::RawImage::filled(8, 8, shade, 100, 200)));
}

TEST(AirLoader, ReadsThreeRows) {
  TempDir dir;
  for (int i = 0; i < 3; ++i) write_image(dir / ("img" + std::to_string(i) + ".png"), static_cast<std::uint8_t>(i * 40));
  write_text(dir / "air.csv", std::string(kAirHeader) +
                                  "img0.png,ITO,India,2023-02-10 09:00,120,60,110,20,0.9,8,30\n"
                                  "img1.png,Bengaluru,India,2023-02-11 14:00,80,30,70,25,0.5,4,18\n"
                                  "img2.png,Mumbai,India,2023-02-12 22:00,95,40,90,22,0.7,6,21\n");
  const auto ds = load_air_dataset(dir / "air.csv", dir.path());
  ASSERT_EQ(ds.records.size(), 3u);
  EXPECT_EQ(ds.rows_read, 3u);
  EXPECT_EQ(ds.missing_images, 0u);
  EXPECT_EQ(ds.records[1].city, "Bengaluru");
  EXPECT_EQ(ds.records[2].timestamp->hour, 22);
  EXPECT_DOUBLE_EQ(*ds.records[0].targets[4], 0.9);
}

TEST(AirLoader, MissingImageIsDroppedAndCounted) {
  TempDir dir;
  write_image(dir / "a.png", 10);
  write_text(dir / "air.csv", std::string(kAirHeader) +
                                  "a.png,ITO,India,2023-02-10 09:00,120,60,110,20,0.9,8,30\n"
                                  "gone.png,ITO,India,2023-02-10 10:00,121,61,111,21,1.0,9,31\n");
  const auto ds = load_air_dataset(dir / "air.csv", dir.path());
  EXPECT_EQ(ds.records.size(), 1u);
  EXPECT_EQ(ds.missing_images, 1u);
  EXPECT_EQ(ds.rows_read, 2u);
}

TEST(AirLoader, MalformedFloatNamesRowAndColumn) {
  TempDir dir;
  write_image(dir / "a.png", 10);
  write_text(dir / "air.csv", std::string(kAirHeader) +
                                  "a.png,ITO,India,2023-02-10 09:00,120,60,110,20,0.9,8,30\n"
                                  "a.png,ITO,India,2023-02-10 10:00,121,61,1x1,21,1.0,9,31\n");
  try {
    load_air_dataset(dir / "air.csv", dir.path());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "PM10");
  }
}

TEST(AirLoader, ColumnNamesAreCaseSensitive) {
  TempDir dir;
  write_text(dir / "air.csv", "filename,city,country,timestamp,aqi,PM2.5,PM10,O3,CO,SO2,NO2\n");
  try {
    load_air_dataset(dir / "air.csv", dir.path());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "AQI");
  }
}

AirSampleRecord record(std::string city, std::string country, bool full = true) {
  AirSampleRecord r;
  r.image_path = "x.png";
  r.city = std::move(city);
  r.country = std::move(country);
  r.timestamp = vision::parse_timestamp("2023-01-01 00:00");
  for (auto& t : r.targets) t = 1.0;
  if (!full) r.targets[5].reset();
  return r;
}

TEST(AirFilter, KeepsOnlyIndianRowsInOrder) {
  const std::vector<AirSampleRecord> mixed{record("ITO", "India"), record("Pokhara", "Nepal"),
                                           record("Biratnagar", "Nepal"), record("Mumbai", "India"),
                                           record("Dimapur", "")};
  const auto out = filter_india(mixed);
  ASSERT_EQ(out.records.size(), 3u);
  EXPECT_EQ(out.removed, 2u);
  EXPECT_EQ(out.records[0].city, "ITO");
  EXPECT_EQ(out.records[1].city, "Mumbai");
  EXPECT_EQ(out.records[2].city, "Dimapur");

  const auto again = filter_india(out.records);
  EXPECT_EQ(again.records.size(), 3u);
  EXPECT_EQ(again.removed, 0u);

  EXPECT_TRUE(filter_india({record("Pokhara", "Nepal")}).records.empty());
}

TEST(AirFilter, DropNullsRemovesIncompleteRows) {
  const std::vector<AirSampleRecord> rows{record("ITO", "India"), record("Mumbai", "India", false),
                                          record("Bengaluru", "India")};
  const auto out = drop_nulls(rows);
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.removed, 1u);
  EXPECT_EQ(out.records[1].city, "Bengaluru");
  EXPECT_EQ(drop_nulls(out.records).removed, 0u);
}

TEST(AirMatrices, FusedWidthIsExtractorPlusMetadata) {
  TempDir dir;
  write_image(dir / "a.png", 10);
  auto r = record("ITO", "India");
  r.image_path = dir / "a.png";
  const vision::SyntheticExtractor ex(3, 32);
  const auto m = build_air_matrices({r, r}, ex);
  EXPECT_EQ(m.features.cols(), 32u + vision::kMetadataDim);
  EXPECT_EQ(m.targets.cols(), 7u);
  EXPECT_EQ(m.features.row(0)[0], m.features.row(1)[0]);
}

TEST(Split, SizesDisjointAndDeterministic) {
  const auto s = split_indices(10, {0.2, 5});
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (auto i : s.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 10u);
  const auto t = split_indices(10, {0.2, 5});
  EXPECT_EQ(s.train, t.train);
  EXPECT_EQ(s.test, t.test);
}

TEST(Split, RejectsTooFewOrEmptyPartitions) {
  EXPECT_THROW(split_indices(1, {}), DomainError);
  EXPECT_THROW(split_indices(3, {0.9, 0}), DomainError);
  EXPECT_THROW(split_indices(10, {0.0, 0}), DomainError);
}

TEST(Split, PartitionPropertyOverSizes) {
  for (std::size_t n = 2; n < 60; ++n) {
    for (double f : {0.2, 0.5, 0.7}) {
      const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - f)));
      if (cut == 0 || cut == n) {
        EXPECT_THROW(split_indices(n, {f, n}), DomainError);
        continue;
      }
      const auto s = split_indices(n, {f, n});
      EXPECT_EQ(s.train.size(), cut);
      std::vector<std::size_t> u = s.train;
      u.insert(u.end(), s.test.begin(), s.test.end());
      std::sort(u.begin(), u.end());
      for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(u[i], i);
    }
  }
}

std::filesystem::path data_file(const char* name) { return std::filesystem::path(AQILUNG_TEST_DATA_DIR) / name; }

TEST(PatientLoader, ThousandRowsElevenFeatures) {
  const auto ds = load_patient_dataset(data_file("patients_1000.csv"));
  EXPECT_EQ(ds.records.size(), 1000u);
  EXPECT_EQ(ds.schema.size(), 11u);
  const auto labeled = ds.to_labeled();
  EXPECT_EQ(labeled.dim(), 11u);
  const auto counts = labeled.class_counts();
  EXPECT_EQ(counts.at(3), 250u);
}

constexpr const char* kPatientHeader =
    "Patient Id,Age,Gender,Air Pollution,Alcohol use,Dust Allergy,OccuPational Hazards,Genetic Risk,"
    "chronic Lung Disease,Balanced Diet,Obesity,Smoking,Passive Smoker,Chest Pain,Coughing of Blood,Fatigue,"
    "Weight Loss,Shortness of Breath,Wheezing,Swallowing Difficulty,Clubbing of Finger Nails,Frequent Cold,"
    "Dry Cough,Snoring,Level\n";

TEST(PatientLoader, SeverityEightIsRejected) {
  TempDir dir;
  write_text(dir / "p.csv", std::string(kPatientHeader) +
                                "P1,30,1,2,2,2,2,2,3,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,Low\n"
                                "P2,30,1,2,2,2,2,2,8,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,Low\n");
  try {
    load_patient_dataset(dir / "p.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "chronic Lung Disease");
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(PatientLoader, FeatureOutsideScaleNamesField) {
  TempDir dir;
  write_text(dir / "p.csv", std::string(kPatientHeader) + "P1,30,1,9,2,2,2,2,3,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,Low\n");
  try {
    load_patient_dataset(dir / "p.csv");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "Air Pollution");
  }
}

TEST(PatientLoader, CustomFeatureSelection) {
  const auto ds = load_patient_dataset(data_file("patients_tiny.csv"), {{"Smoking", 1, 8}, {"Fatigue", 1, 9}});
  EXPECT_EQ(ds.schema.size(), 2u);
  EXPECT_THROW(load_patient_dataset(data_file("patients_tiny.csv"), {{"Smoking", 1, 8}, {"smoking", 1, 8}}),
               ValidationError);
  EXPECT_THROW(load_patient_dataset(data_file("patients_tiny.csv"), {{"Height", 1, 8}}), ValidationError);
}

TEST(Normalize, HandComputedColumn) {
  const LabeledDataset d(Tensor({3, 2}, {2, 0, 4, 1, 6, 1}), {1, 2, 3});
  const auto n = normalize_features(d);
  EXPECT_EQ(values(n.data.features), (std::vector<double>{0, 0, 0.5, 1, 1, 1}));
  EXPECT_EQ(n.spec.apply(d.features), n.data.features);
}

TEST(Normalize, ConstantFeatureMapsToZero) {
  const Tensor x({3, 1}, {5, 5, 5});
  const auto spec = fit_normalization(x);
  EXPECT_EQ(values(spec.apply(x)), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(spec.denormalize(spec.apply(x)), x);
}

TEST(Normalize, DenormalizeInvertsWithinTolerance) {
  SeededRng rng(42);
  std::vector<double> v(200 * 11);
  for (auto& e : v) e = rng.uniform(-50.0, 300.0);
  const Tensor x({200, 11}, v);
  const auto spec = fit_normalization(x);
  const auto back = spec.denormalize(spec.apply(x));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(values(back)[i], v[i], 1e-12);
}

TEST(Standardizer, RoundTripAndMoments) {
  const Tensor x({4, 2}, {1, 10, 2, 10, 3, 10, 4, 10});
  const auto s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(s.scale[1], 1.0);
  const auto back = s.inverse(s.transform(x));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(values(back)[i], values(x)[i], 1e-12);
}

}  // namespace
}  // namespace aqilung::data
