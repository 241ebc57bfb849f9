// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "aqilung/aqi/index.hpp"
#include "aqilung/config.hpp"
#include "aqilung/data/air.hpp"
#include "aqilung/data/normalize.hpp"
#include "aqilung/data/patient.hpp"
#include "aqilung/data/split.hpp"
#include "aqilung/imbalance/resample.hpp"
#include "aqilung/models.hpp"
#include "aqilung/nn/metrics.hpp"
#include "aqilung/nn/train.hpp"
#include "aqilung/report.hpp"
#include "aqilung/severity/evaluate.hpp"

namespace aqilung::pipeline {

// Streams derived from the config seed, one per pipeline stage.
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kResampleStream = 3;
inline constexpr std::uint64_t kMlpInitStream = 4;

inline data::SplitConfig split_config(const AppConfig& c) {
  return {c.data.test_fraction, SeededRng(c.seed).derive(kSplitStream).seed()};
}

/// SVMSMOTE + undersampling to the configured plan.
inline LabeledDataset resample(const LabeledDataset& data, const AppConfig& c) {
  std::vector<int> classes;
  for (const auto& [label, count] : data.class_counts()) classes.push_back(label);
  const auto plan = c.plan_for(classes);
  return imbalance::resample_pipeline(data, plan, c.resample.smote, SeededRng(c.seed).derive(kResampleStream),
                                      imbalance::svm_seed_selector(c.severity.svc));
}

/// Patients prepared for the classifiers: train is normalized (and
/// resampled when enabled), test is normalized with the train spec.
struct SeverityData {
  LabeledDataset train;
  LabeledDataset test;
  data::NormalizationSpec spec;
  std::size_t train_rows_before_resampling = 0;
};

inline SeverityData prepare_severity_data(const data::PatientDataset& patients, const AppConfig& c) {
  const auto all = patients.to_labeled();
  const auto split = data::split_indices(all.size(), split_config(c));
  auto norm = data::normalize_features(all.subset(split.train));
  const auto test = all.subset(split.test);
  SeverityData out;
  out.spec = norm.spec;
  out.test = LabeledDataset(norm.spec.apply(test.features), test.labels);
  out.train_rows_before_resampling = norm.data.size();
  out.train = std::move(norm.data);
  if (c.severity.resample) out.train = resample(out.train, c);
  return out;
}

struct SeverityTraining {
  SeverityModel knn;
  SeverityModel svc;
  severity::EvalReport knn_train, knn_test, svc_train, svc_test;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;

  EvalSummary summary() const {
    return {{{"KNN", knn_train.accuracy, knn_test.accuracy}, {"SVC", svc_train.accuracy, svc_test.accuracy}}, {}};
  }
};

inline SeverityTraining train_severity(const data::PatientDataset& patients, const AppConfig& c) {
  const auto d = prepare_severity_data(patients, c);
  SeverityTraining out;
  out.train_rows = d.train.size();
  out.test_rows = d.test.size();
  const auto knn = severity::knn_fit(d.train, c.severity.k);
  const auto svc = severity::svc_fit(d.train, c.severity.svc);
  out.knn_train = severity::evaluate(knn, d.train);
  out.knn_test = severity::evaluate(knn, d.test);
  out.svc_train = severity::evaluate(svc, d.train);
  out.svc_test = severity::evaluate(svc, d.test);
  out.knn = {patients.schema, d.spec, knn};
  out.svc = {patients.schema, d.spec, svc};
  return out;
}

/// Fits scalers and the MLP on fused features `x` [n x d] and raw targets
/// `y` [n x 7].
inline AqiModel fit_aqi_model(const Tensor& x, const Tensor& y, const ExtractorSpec& extractor, std::size_t meta_dim,
                              nn::MlpConfig mlp, const nn::TrainConfig& train, std::uint64_t seed,
                              std::vector<double>* loss_history = nullptr) {
  AqiModel m;
  m.extractor = extractor;
  m.meta_dim = meta_dim;
  if (x.cols() != m.input_dim()) {
    throw DimensionError("fused feature width " + std::to_string(x.cols()) + " but extractor + metadata give " +
                         std::to_string(m.input_dim()));
  }
  m.feature_scaler = data::Standardizer::fit(x);
  m.target_scaler = data::Standardizer::fit(y);
  mlp.input_dim = m.input_dim();
  auto init = nn::MlpRegressor::create(mlp, SeededRng(seed).derive(kMlpInitStream).seed());
  auto result = nn::train_regressor(std::move(init), m.feature_scaler.transform(x), m.target_scaler.transform(y), train);
  if (loss_history) *loss_history = std::move(result.loss_history);
  m.mlp = std::move(result.model);
  return m;
}

/// Metrics on the AQI column (index 0) in source units.
struct AqiScores {
  double train_category_accuracy = 0.0;
  double test_category_accuracy = 0.0;
  double test_mse = 0.0;
  double test_r2 = 0.0;
};

inline AqiScores score_aqi(const AqiModel& m, const Tensor& train_x, const Tensor& train_y, const Tensor& test_x,
                           const Tensor& test_y) {
  const auto pr = nn::column(m.predict(train_x), 0), tr = nn::column(train_y, 0);
  const auto pt = nn::column(m.predict(test_x), 0), tt = nn::column(test_y, 0);
  // A regressor can undershoot zero; categories use the floored value, as the service does.
  auto floored = [](std::vector<double> v) {
    for (double& e : v) e = std::max(0.0, e);
    return v;
  };
  AqiScores s;
  s.train_category_accuracy = aqi::classification_accuracy(floored(pr), tr);
  s.test_category_accuracy = aqi::classification_accuracy(floored(pt), tt);
  double se = 0.0;
  for (std::size_t i = 0; i < pt.size(); ++i) se += (pt[i] - tt[i]) * (pt[i] - tt[i]);
  s.test_mse = se / static_cast<double>(pt.size());
  s.test_r2 = nn::r2_score(pt, tt);
  return s;
}

struct AirCleaning {
  std::vector<data::AirSampleRecord> records;
  std::size_t rows_read = 0;
  std::size_t missing_images = 0;
  std::size_t removed_non_india = 0;
  std::size_t removed_nulls = 0;
};

inline AirCleaning load_clean_air(const AppConfig& c) {
  if (c.data.air_csv.empty()) throw ValidationError("data.air_csv is not configured", "data.air_csv");
  const auto root = c.data.image_root.empty() ? c.data.air_csv.parent_path() : c.data.image_root;
  auto ds = data::load_air_dataset(c.data.air_csv, root);
  auto india = data::filter_india(ds.records);
  auto clean = data::drop_nulls(india.records);
  return {std::move(clean.records), ds.rows_read, ds.missing_images, india.removed, clean.removed};
}

struct AqiTraining {
  AqiModel model;
  AqiScores scores;
  std::vector<double> loss_history;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;

  EvalSummary summary() const {
    return {{{"MLP (AQI category)", scores.train_category_accuracy, scores.test_category_accuracy}},
            RegressionScore{scores.test_mse, scores.test_r2}};
  }
};

inline AqiTraining train_aqi(const std::vector<data::AirSampleRecord>& records, const AppConfig& c,
                             const vision::FeatureExtractor& extractor) {
  const auto split = data::split_indices(records.size(), split_config(c));
  std::vector<data::AirSampleRecord> train, test;
  for (auto i : split.train) train.push_back(records[i]);
  for (auto i : split.test) test.push_back(records[i]);
  const auto tr = data::build_air_matrices(train, extractor);
  const auto te = data::build_air_matrices(test, extractor);
  AqiTraining out;
  out.train_rows = train.size();
  out.test_rows = test.size();
  const auto spec = describe_extractor(c.aqi.extractor, extractor);
  out.model = fit_aqi_model(tr.features, tr.targets, spec, vision::kMetadataDim, c.aqi.mlp, c.aqi.train, c.seed,
                            &out.loss_history);
  out.scores = score_aqi(out.model, tr.features, tr.targets, te.features, te.targets);
  return out;
}

}  // namespace aqilung::pipeline
