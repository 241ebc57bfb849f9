// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

// Trains KNN and SVC on a patient CSV with the default configuration and
// prints the accuracy table. Usage: severity_quickstart patients.csv

#include <cstdio>
#include <exception>
#include <iostream>

#include "aqilung/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s patients.csv\n", argv[0]);
    return 2;
  }
  try {
    aqilung::AppConfig c;
    const auto patients = aqilung::data::load_patient_dataset(argv[1], c.severity.features);
    const auto result = aqilung::pipeline::train_severity(patients, c);
    std::printf("%zu train rows after resampling, %zu test rows\n", result.train_rows, result.test_rows);
    std::cout << aqilung::render_report(result.summary());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
