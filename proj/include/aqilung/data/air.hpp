// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqilung/csv.hpp"
#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"
#include "aqilung/vision/extractor.hpp"
#include "aqilung/vision/image.hpp"
#include "aqilung/vision/metadata.hpp"
#include "aqilung/vision/preprocess.hpp"

namespace aqilung::data {

/// Regression targets in output order.
inline constexpr std::array<std::string_view, 7> kAirTargets{"AQI", "PM2.5", "PM10", "O3", "CO", "SO2", "NO2"};

inline constexpr std::array<std::string_view, 4> kAirMetaColumns{"filename", "city", "country", "timestamp"};

struct AirSampleRecord {
  std::filesystem::path image_path;
  std::string city;
  std::string country;
  std::optional<vision::Timestamp> timestamp;
  std::array<std::optional<double>, 7> targets;
  /// 1-based data row in the source CSV.
  std::size_t source_row = 0;

  bool complete() const {
    if (image_path.empty() || trim(city).empty() || !timestamp) return false;
    for (const auto& t : targets) {
      if (!t) return false;
    }
    return true;
  }

  std::array<double, 7> target_values() const {
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < 7; ++i) {
      if (!targets[i]) throw ValidationError("row " + std::to_string(source_row) + " has a null target", std::string(kAirTargets[i]));
      out[i] = *targets[i];
    }
    return out;
  }
};

struct AirDataset {
  std::vector<AirSampleRecord> records;
  std::size_t rows_read = 0;
  /// Rows dropped because the referenced image file does not exist.
  std::size_t missing_images = 0;
};

/// Rows kept plus how many were removed.
struct AirFilterResult {
  std::vector<AirSampleRecord> records;
  std::size_t removed = 0;
};

/// Parses the air CSV (columns filename, city, country, timestamp, AQI,
/// PM2.5, PM10, O3, CO, SO2, NO2; exact names) and joins image paths
/// against `image_root`. Null cells load as missing; rows whose image file
/// is absent are dropped and counted.
inline AirDataset load_air_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& image_root) {
  const CsvTable table = read_csv_file(csv_path.string());
  std::array<std::size_t, 4> meta{};
  for (std::size_t i = 0; i < kAirMetaColumns.size(); ++i) meta[i] = table.require_exact(kAirMetaColumns[i]);
  std::array<std::size_t, 7> target_col{};
  for (std::size_t i = 0; i < kAirTargets.size(); ++i) target_col[i] = table.require_exact(kAirTargets[i]);

  AirDataset out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ++out.rows_read;
    AirSampleRecord rec;
    rec.source_row = r + 1;
    const std::string file = trim(row[meta[0]]);
    rec.city = trim(row[meta[1]]);
    rec.country = trim(row[meta[2]]);
    if (!is_null_cell(row[meta[3]])) {
      try {
        rec.timestamp = vision::parse_timestamp(row[meta[3]]);
      } catch (const ValidationError& e) {
        throw ParseError(rec.source_row, "timestamp", e.what());
      }
    }
    for (std::size_t i = 0; i < 7; ++i) {
      const auto& cell = row[target_col[i]];
      if (is_null_cell(cell)) continue;
      const auto v = parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(rec.source_row, std::string(kAirTargets[i]), "'" + cell + "' is not a finite number");
      }
      rec.targets[i] = *v;
    }
    if (!is_null_cell(file)) {
      rec.image_path = image_root / file;
      std::error_code ec;
      if (!std::filesystem::is_regular_file(rec.image_path, ec)) {
        ++out.missing_images;
        continue;
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

/// Keeps rows whose city is one of the seven Indian sites and whose country
/// is India or blank. Order is preserved.
inline AirFilterResult filter_india(const std::vector<AirSampleRecord>& records) {
  AirFilterResult out;
  for (const auto& r : records) {
    const bool country_ok = r.country.empty() || iequals(r.country, "India");
    if (country_ok && vision::city_index(r.city)) {
      out.records.push_back(r);
    } else {
      ++out.removed;
    }
  }
  return out;
}

/// Removes rows with any missing target, city, timestamp, or image path.
inline AirFilterResult drop_nulls(const std::vector<AirSampleRecord>& records) {
  AirFilterResult out;
  for (const auto& r : records) {
    if (r.complete()) {
      out.records.push_back(r);
    } else {
      ++out.removed;
    }
  }
  return out;
}

/// Feature row for one sample: extractor output fused with the metadata
/// encoding.
inline Tensor air_feature_row(const AirSampleRecord& rec, const vision::FeatureExtractor& extractor) {
  const auto image = vision::preprocess(vision::read_image(rec.image_path));
  const auto features = vision::extract_features(image, extractor);
  if (!rec.timestamp) throw ValidationError("row " + std::to_string(rec.source_row) + " has no timestamp", "timestamp");
  return vision::fuse(features, vision::encode_metadata({rec.city, *rec.timestamp}));
}

struct AirMatrices {
  Tensor features;  // [n x (output_dim + 16)]
  Tensor targets;   // [n x 7]
};

inline AirMatrices build_air_matrices(const std::vector<AirSampleRecord>& records,
                                      const vision::FeatureExtractor& extractor) {
  if (records.empty()) throw DomainError("no air samples to featurize");
  const std::size_t d = extractor.output_dim() + vision::kMetadataDim;
  std::vector<double> x, y;
  x.reserve(records.size() * d);
  y.reserve(records.size() * 7);
  for (const auto& rec : records) {
    const auto row = air_feature_row(rec, extractor);
    x.insert(x.end(), row.data().begin(), row.data().end());
    const auto t = rec.target_values();
    y.insert(y.end(), t.begin(), t.end());
  }
  return {Tensor({records.size(), d}, std::move(x)), Tensor({records.size(), 7}, std::move(y))};
}

}  // namespace aqilung::data
