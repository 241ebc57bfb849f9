// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqilung/data/air.hpp"
#include "aqilung/models.hpp"
#include "aqilung/store/artifact.hpp"

namespace aqilung::store {

inline constexpr std::string_view kAqiKind = "aqi-mlp";
inline constexpr std::string_view kKnnKind = "severity-knn";
inline constexpr std::string_view kSvcKind = "severity-svc";

/// Provenance written alongside the weights; not needed to predict.
struct ArtifactMeta {
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  Json hyperparameters = Json::object();
  std::string breakpoints_sha256;
};

namespace detail {

inline Json meta_fields(const ArtifactMeta& meta) {
  Json j;
  j["seed"] = meta.seed;
  j["metrics"] = Json::object();
  for (const auto& [k, v] : meta.metrics) j["metrics"][k] = v;
  return j;
}

inline ArtifactMeta read_meta(const Json& m) {
  ArtifactMeta meta;
  meta.seed = m.value("seed", std::uint64_t{0});
  if (m.contains("metrics")) {
    for (auto it = m["metrics"].begin(); it != m["metrics"].end(); ++it) meta.metrics[it.key()] = it.value().get<double>();
  }
  if (m.contains("hyperparameters")) meta.hyperparameters = m["hyperparameters"];
  meta.breakpoints_sha256 = m.value("breakpoints_sha256", std::string{});
  return meta;
}

inline Json schema_json(const std::vector<data::PatientFeature>& schema) {
  Json out = Json::array();
  for (const auto& f : schema) out.push_back({{"name", f.name}, {"min", f.lo}, {"max", f.hi}});
  return out;
}

inline std::vector<data::PatientFeature> schema_from_json(const Json& j) {
  std::vector<data::PatientFeature> out;
  for (const auto& f : j) out.push_back({f.at("name").get<std::string>(), f.at("min").get<int>(), f.at("max").get<int>()});
  return out;
}

inline std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

inline std::vector<int> as_labels(const std::vector<double>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (double d : v) {
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw SchemaError("label array holds a non-integer");
    out.push_back(i);
  }
  return out;
}

template <typename Fn>
auto guarded(const std::filesystem::path& dir, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw SchemaError(dir.string() + ": " + e.what());
  } catch (const DimensionError& e) {
    throw SchemaError(dir.string() + ": " + e.what());
  }
}

}  // namespace detail

inline Json extractor_json(const ExtractorSpec& e) {
  return {{"kind", e.kind},         {"seed", e.seed},           {"output_dim", e.output_dim},
          {"grid", e.grid},         {"onnx_path", e.onnx_path}, {"checksum", e.checksum}};
}

inline ExtractorSpec extractor_from_json(const Json& j) {
  ExtractorSpec e;
  e.kind = j.at("kind").get<std::string>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.output_dim = j.at("output_dim").get<std::size_t>();
  e.grid = j.at("grid").get<std::size_t>();
  e.onnx_path = j.at("onnx_path").get<std::string>();
  e.checksum = j.at("checksum").get<std::string>();
  return e;
}

inline void save_aqi_model(const AqiModel& model, const std::filesystem::path& dir, const ArtifactMeta& meta = {}) {
  const auto& cfg = model.mlp.config();
  Json m = detail::meta_fields(meta);
  m["kind"] = kAqiKind;
  Json hp = meta.hyperparameters;
  hp["hidden"] = cfg.hidden;
  hp["dropout_rate"] = cfg.dropout_rate;
  hp["bn_momentum"] = cfg.bn_momentum;
  m["hyperparameters"] = hp;
  Json targets = Json::array();
  for (auto t : data::kAirTargets) targets.push_back(std::string(t));
  m["feature_schema"] = {{"extractor", extractor_json(model.extractor)},
                         {"meta_dim", model.meta_dim},
                         {"input_dim", model.input_dim()},
                         {"targets", targets}};
  if (!meta.breakpoints_sha256.empty()) m["breakpoints_sha256"] = meta.breakpoints_sha256;

  WeightWriter w;
  w.add("feature_scaler.mean", model.feature_scaler.mean);
  w.add("feature_scaler.scale", model.feature_scaler.scale);
  w.add("target_scaler.mean", model.target_scaler.mean);
  w.add("target_scaler.scale", model.target_scaler.scale);
  for (std::size_t i = 0; i < model.mlp.blocks().size(); ++i) {
    const auto& b = model.mlp.blocks()[i];
    const std::string p = "hidden" + std::to_string(i) + ".";
    w.add(p + "dense.weights", b.dense.weights);
    w.add(p + "dense.bias", b.dense.bias);
    w.add(p + "norm.gamma", b.norm.gamma);
    w.add(p + "norm.beta", b.norm.beta);
    w.add(p + "norm.running_mean", b.norm.running_mean);
    w.add(p + "norm.running_var", b.norm.running_var);
    w.add_scalar(p + "norm.epsilon", b.norm.epsilon);
  }
  w.add("output.weights", model.mlp.output_layer().weights);
  w.add("output.bias", model.mlp.output_layer().bias);
  write_artifact(dir, std::move(m), w);
}

struct LoadedAqiModel {
  AqiModel model;
  ArtifactMeta meta;
};

/// `expected_input_dim`, when given, must equal the stored fused width.
inline LoadedAqiModel load_aqi_model(const std::filesystem::path& dir,
                                     std::optional<std::size_t> expected_input_dim = {}) {
  const auto a = read_artifact(dir, kAqiKind);
  return detail::guarded(dir, [&] {
    const auto& m = a.manifest;
    const auto& fs = m.at("feature_schema");
    LoadedAqiModel out;
    out.meta = detail::read_meta(m);
    out.model.extractor = extractor_from_json(fs.at("extractor"));
    out.model.meta_dim = fs.at("meta_dim").get<std::size_t>();
    if (expected_input_dim && *expected_input_dim != out.model.input_dim()) {
      throw SchemaError(dir.string() + ": model expects " + std::to_string(out.model.input_dim()) +
                        " fused features, caller has " + std::to_string(*expected_input_dim));
    }
    const auto& hp = m.at("hyperparameters");
    nn::MlpConfig cfg;
    cfg.input_dim = out.model.input_dim();
    cfg.hidden = hp.at("hidden").get<std::vector<std::size_t>>();
    cfg.dropout_rate = hp.at("dropout_rate").get<double>();
    cfg.bn_momentum = hp.at("bn_momentum").get<double>();

    auto r = a.reader();
    out.model.feature_scaler = {r.vector("feature_scaler.mean"), r.vector("feature_scaler.scale")};
    out.model.target_scaler = {r.vector("target_scaler.mean"), r.vector("target_scaler.scale")};
    std::vector<nn::HiddenBlock> blocks;
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
      const std::string p = "hidden" + std::to_string(i) + ".";
      nn::HiddenBlock b;
      b.dense.weights = r.tensor(p + "dense.weights");
      b.dense.bias = r.tensor(p + "dense.bias");
      b.norm.gamma = r.tensor(p + "norm.gamma");
      b.norm.beta = r.tensor(p + "norm.beta");
      b.norm.running_mean = r.tensor(p + "norm.running_mean");
      b.norm.running_var = r.tensor(p + "norm.running_var");
      b.norm.epsilon = r.scalar(p + "norm.epsilon");
      b.norm.momentum = cfg.bn_momentum;
      b.dropout = nn::DropoutLayer(cfg.dropout_rate);
      cfg.bn_epsilon = b.norm.epsilon;
      blocks.push_back(std::move(b));
    }
    nn::DenseLayer output{r.tensor("output.weights"), r.tensor("output.bias")};
    r.finish();
    out.model.mlp = nn::MlpRegressor(cfg, std::move(blocks), std::move(output));
    out.model.feature_scaler.validate();
    out.model.target_scaler.validate();
    if (out.model.feature_scaler.dim() != cfg.input_dim || out.model.target_scaler.dim() != nn::kOutputDim) {
      throw SchemaError(dir.string() + ": scaler widths do not match the network");
    }
    return out;
  });
}

inline void save_severity_model(const SeverityModel& model, const std::filesystem::path& dir,
                                const ArtifactMeta& meta = {}) {
  Json m = detail::meta_fields(meta);
  Json hp = meta.hyperparameters;
  m["feature_schema"] = {{"features", detail::schema_json(model.schema)}};
  WeightWriter w;
  w.add("normalization.min", model.normalization.mins);
  w.add("normalization.max", model.normalization.maxs);
  if (const auto* knn = std::get_if<severity::KnnModel>(&model.classifier)) {
    m["kind"] = kKnnKind;
    hp["k"] = knn->k;
    w.add("knn.points", knn->points);
    w.add("knn.labels", detail::as_doubles(knn->labels));
  } else {
    const auto& svc = std::get<severity::SvcModel>(model.classifier);
    m["kind"] = kSvcKind;
    hp["kernel"] = svc.config.kernel == severity::KernelSpec::Kind::kRbf ? "rbf" : "linear";
    hp["c"] = svc.config.c;
    hp["tol"] = svc.config.tol;
    hp["max_passes"] = svc.config.max_passes;
    hp["classes"] = svc.classes;
    Json pairs = Json::array();
    for (const auto& pm : svc.machines) pairs.push_back({pm.positive, pm.negative});
    hp["pairs"] = pairs;
    hp["svc_seed"] = svc.config.seed;
    for (std::size_t i = 0; i < svc.machines.size(); ++i) {
      const auto& s = svc.machines[i].svm;
      const std::string p = "machine" + std::to_string(i) + ".";
      w.add_scalar(p + "gamma", s.kernel.gamma);
      w.add_scalar(p + "bias", s.bias);
      w.add(p + "coef", s.coef);
      w.add(p + "support_vectors", s.support_vectors.empty() ? Tensor({1, svc.dim}) : s.support_vectors);
    }
  }
  m["hyperparameters"] = hp;
  write_artifact(dir, std::move(m), w);
}

struct LoadedSeverityModel {
  SeverityModel model;
  ArtifactMeta meta;
};

/// Loads either classifier kind. `expected_schema`, when given, must match
/// the stored feature list exactly.
inline LoadedSeverityModel load_severity_model(const std::filesystem::path& dir,
                                               std::optional<SeverityKind> expected_kind = {},
                                               const std::vector<data::PatientFeature>* expected_schema = nullptr) {
  const auto kind_name = read_manifest(dir).at("kind").get<std::string>();
  if (kind_name != kKnnKind && kind_name != kSvcKind) {
    throw SchemaError(dir.string() + ": '" + kind_name + "' is not a severity model");
  }
  if (expected_kind && kind_name != (*expected_kind == SeverityKind::kKnn ? kKnnKind : kSvcKind)) {
    throw SchemaError(dir.string() + ": artifact kind '" + kind_name + "', expected '" +
                      std::string(expected_kind == SeverityKind::kKnn ? kKnnKind : kSvcKind) + "'");
  }
  const auto a = read_artifact(dir, kind_name);
  return detail::guarded(dir, [&] {
    const auto& m = a.manifest;
    LoadedSeverityModel out;
    out.meta = detail::read_meta(m);
    out.model.schema = detail::schema_from_json(m.at("feature_schema").at("features"));
    if (expected_schema && *expected_schema != out.model.schema) {
      throw SchemaError(dir.string() + ": feature schema differs from the configured one");
    }
    const std::size_t d = out.model.schema.size();
    auto r = a.reader();
    out.model.normalization = {r.vector("normalization.min"), r.vector("normalization.max")};
    out.model.normalization.validate();
    if (out.model.normalization.dim() != d) throw SchemaError(dir.string() + ": normalization width mismatch");
    const auto& hp = m.at("hyperparameters");
    if (kind_name == kKnnKind) {
      severity::KnnModel knn;
      knn.k = hp.at("k").get<std::size_t>();
      knn.points = r.tensor("knn.points");
      knn.labels = detail::as_labels(r.vector("knn.labels"));
      if (knn.points.rank() != 2 || knn.points.cols() != d || knn.points.rows() != knn.labels.size() ||
          knn.k == 0 || knn.k > knn.labels.size()) {
        throw SchemaError(dir.string() + ": inconsistent knn arrays");
      }
      out.model.classifier = std::move(knn);
    } else {
      severity::SvcModel svc;
      svc.dim = d;
      svc.config.kernel = hp.at("kernel").get<std::string>() == "rbf" ? severity::KernelSpec::Kind::kRbf
                                                                     : severity::KernelSpec::Kind::kLinear;
      svc.config.c = hp.at("c").get<double>();
      svc.config.tol = hp.at("tol").get<double>();
      svc.config.max_passes = hp.at("max_passes").get<std::size_t>();
      svc.config.seed = hp.at("svc_seed").get<std::uint64_t>();
      svc.classes = hp.at("classes").get<std::vector<int>>();
      const auto pairs = hp.at("pairs");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string p = "machine" + std::to_string(i) + ".";
        severity::PairMachine pm;
        pm.positive = pairs[i].at(0).get<int>();
        pm.negative = pairs[i].at(1).get<int>();
        const double gamma = r.scalar(p + "gamma");
        pm.svm.kernel = svc.config.kernel == severity::KernelSpec::Kind::kRbf ? severity::KernelSpec::rbf(gamma)
                                                                              : severity::KernelSpec::linear();
        if (svc.config.kernel == severity::KernelSpec::Kind::kRbf) svc.config.gamma = gamma;
        pm.svm.bias = r.scalar(p + "bias");
        pm.svm.coef = r.vector(p + "coef");
        pm.svm.support_vectors = r.tensor(p + "support_vectors");
        if (pm.svm.coef.empty()) pm.svm.support_vectors = Tensor();
        if (!pm.svm.coef.empty() && (pm.svm.support_vectors.rank() != 2 || pm.svm.support_vectors.cols() != d ||
                                     pm.svm.support_vectors.rows() != pm.svm.coef.size())) {
          throw SchemaError(dir.string() + ": inconsistent svc arrays for machine " + std::to_string(i));
        }
        svc.machines.push_back(std::move(pm));
      }
      for (int c : svc.classes) {
        if (c < kMinSeverity || c > kMaxSeverity) throw SchemaError(dir.string() + ": class label out of range");
      }
      out.model.classifier = std::move(svc);
    }
    r.finish();
    return out;
  });
}

}  // namespace aqilung::store
