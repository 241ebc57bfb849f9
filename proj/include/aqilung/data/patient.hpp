// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "aqilung/csv.hpp"
#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"

namespace aqilung::data {

/// A selected patient column and its ordinal scale.
struct PatientFeature {
  std::string name;
  int lo = 1;
  int hi = 8;

  friend bool operator==(const PatientFeature&, const PatientFeature&) = default;
};

/// Name of the exposure feature that the AQI bridge fills.
inline constexpr std::string_view kExposureFeature = "Air Pollution";

inline constexpr std::string_view kSeverityColumn = "chronic Lung Disease";

/// Default 11 features with the source dataset's scales. Column lookup is
/// case-insensitive, so "Occupational Hazards" matches the source's
/// "OccuPational Hazards".
inline std::vector<PatientFeature> default_patient_features() {
  return {
      {"Age", 0, 120},          {"Gender", 1, 2},        {"Air Pollution", 1, 8},
      {"Alcohol use", 1, 8},    {"Dust Allergy", 1, 8},  {"Occupational Hazards", 1, 8},
      {"Genetic Risk", 1, 7},   {"Smoking", 1, 8},       {"Passive Smoker", 1, 8},
      {"Obesity", 1, 7},        {"Balanced Diet", 1, 7},
  };
}

struct PatientRecord {
  std::vector<int> features;
  int severity = 0;
};

struct PatientDataset {
  std::vector<PatientFeature> schema;
  std::vector<PatientRecord> records;

  LabeledDataset to_labeled() const {
    if (records.empty()) return {};
    Tensor x({records.size(), schema.size()});
    std::vector<int> y;
    y.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (std::size_t j = 0; j < schema.size(); ++j) x(i, j) = records[i].features[j];
      y.push_back(records[i].severity);
    }
    return LabeledDataset(std::move(x), std::move(y));
  }
};

inline void validate_patient_schema(const std::vector<PatientFeature>& schema) {
  if (schema.empty()) throw ValidationError("patient feature list is empty", "features");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].lo > schema[i].hi) {
      throw ValidationError("feature '" + schema[i].name + "' has an empty scale", schema[i].name);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (iequals(schema[i].name, schema[j].name)) {
        throw ValidationError("feature '" + schema[i].name + "' listed twice", schema[i].name);
      }
    }
  }
}

/// Reads the patient CSV, keeping the configured features (by header name)
/// and the severity column. Cells must be integers on their declared scale;
/// severity must be 1..7.
inline PatientDataset parse_patient_table(const CsvTable& table,
                                          const std::vector<PatientFeature>& schema = default_patient_features()) {
  validate_patient_schema(schema);
  std::vector<std::size_t> cols;
  for (const auto& f : schema) cols.push_back(table.require(f.name));
  const std::size_t target = table.require(kSeverityColumn);

  PatientDataset out;
  out.schema = schema;
  out.records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    auto read_int = [&](std::size_t col, const std::string& field) {
      const auto v = parse_int(row[col]);
      if (!v) throw ParseError(row_no, field, "'" + row[col] + "' is not an integer");
      return static_cast<int>(*v);
    };
    PatientRecord rec;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const int v = read_int(cols[j], schema[j].name);
      if (v < schema[j].lo || v > schema[j].hi) {
        throw ValidationError("row " + std::to_string(row_no) + ": " + schema[j].name + " = " + std::to_string(v) +
                                  " outside " + std::to_string(schema[j].lo) + ".." + std::to_string(schema[j].hi),
                              schema[j].name);
      }
      rec.features.push_back(v);
    }
    rec.severity = read_int(target, std::string(kSeverityColumn));
    if (rec.severity < kMinSeverity || rec.severity > kMaxSeverity) {
      throw ValidationError("row " + std::to_string(row_no) + ": severity " + std::to_string(rec.severity) +
                                " outside 1..7",
                            std::string(kSeverityColumn));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline PatientDataset load_patient_dataset(const std::filesystem::path& csv_path,
                                           const std::vector<PatientFeature>& schema = default_patient_features()) {
  return parse_patient_table(read_csv_file(csv_path.string()), schema);
}

}  // namespace aqilung::data
