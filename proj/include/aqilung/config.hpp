// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aqilung/csv.hpp"
#include "aqilung/data/patient.hpp"
#include "aqilung/dataset.hpp"
#include "aqilung/error.hpp"
#include "aqilung/imbalance/resample.hpp"
#include "aqilung/models.hpp"
#include "aqilung/nn/mlp.hpp"
#include "aqilung/nn/train.hpp"
#include "aqilung/severity/svc.hpp"
#include "aqilung/toml.hpp"

namespace aqilung {

struct DataSection {
  std::filesystem::path air_csv;
  std::filesystem::path image_root;
  std::filesystem::path patient_csv;
  double test_fraction = 0.2;
};

struct AqiSection {
  ExtractorSpec extractor;
  nn::MlpConfig mlp;  // input_dim is filled from the extractor at train time
  nn::TrainConfig train;
};

struct SeveritySection {
  std::vector<data::PatientFeature> features = data::default_patient_features();
  std::size_t k = 5;
  severity::SvcConfig svc;
  bool resample = true;
  std::string default_model = "knn";
};

struct ResampleSection {
  imbalance::SmoteParams smote;
  /// Even split of `total` over the classes present, unless `targets` is set.
  std::size_t total = 1550;
  ResamplingPlan targets;
};

struct ServiceSection {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::string default_model = "knn";
};

struct AppConfig {
  std::uint64_t seed = 0;
  DataSection data;
  AqiSection aqi;
  SeveritySection severity;
  ResampleSection resample;
  std::filesystem::path models_dir = "models";
  std::filesystem::path reports_dir = "reports";
  ServiceSection service;

  /// Plan for the given class labels: explicit targets, else an even split.
  ResamplingPlan plan_for(std::span<const int> classes) const {
    if (!resample.targets.empty()) return resample.targets;
    return imbalance::even_plan(classes, resample.total);
  }
};

namespace config_detail {

using toml::Document;
using toml::Key;
using toml::Value;

class Reader {
 public:
  Reader(const Document& doc, std::filesystem::path base) : doc_(doc), base_(std::move(base)) {}

  const Value* find(const Key& k) {
    const auto it = doc_.find(k);
    if (it == doc_.end()) return nullptr;
    used_.insert(k);
    return &it->second;
  }

  [[noreturn]] static void type_error(const Key& k, const Value& v, std::string_view want) {
    throw ConfigError(v.line, "'" + toml::key_str(k) + "' must be " + std::string(want) + ", got " +
                                  std::string(v.kind_name()));
  }

  void string(const Key& k, std::string& out) {
    if (const auto* v = find(k)) {
      if (v->kind != Value::Kind::kString) type_error(k, *v, "a string");
      out = v->str;
    }
  }

  /// Relative paths resolve against the config file's directory.
  void path(const Key& k, std::filesystem::path& out) {
    if (const auto* v = find(k)) {
      if (v->kind != Value::Kind::kString) type_error(k, *v, "a string");
      std::filesystem::path p(v->str);
      out = p.is_absolute() || p.empty() ? p : (base_ / p).lexically_normal();
    }
  }

  void boolean(const Key& k, bool& out) {
    if (const auto* v = find(k)) {
      if (v->kind != Value::Kind::kBool) type_error(k, *v, "a boolean");
      out = v->boolean;
    }
  }

  template <typename T>
  void integer(const Key& k, T& out, std::int64_t lo = 0) {
    if (const auto* v = find(k)) {
      if (v->kind != Value::Kind::kInt) type_error(k, *v, "an integer");
      if (v->integer < lo) {
        throw ConfigError(v->line, "'" + toml::key_str(k) + "' must be at least " + std::to_string(lo));
      }
      out = static_cast<T>(v->integer);
    }
  }

  void number(const Key& k, double& out) {
    if (const auto* v = find(k)) out = as_number(k, *v);
  }

  static double as_number(const Key& k, const Value& v) {
    if (v.kind == Value::Kind::kInt) return static_cast<double>(v.integer);
    if (v.kind != Value::Kind::kFloat) type_error(k, v, "a number");
    return v.number;
  }

  void sizes(const Key& k, std::vector<std::size_t>& out) {
    if (const auto* v = find(k)) {
      if (v->kind != Value::Kind::kArray) type_error(k, *v, "an array of integers");
      out.clear();
      for (const auto& item : v->items) {
        if (item.kind != Value::Kind::kInt || item.integer <= 0) {
          throw ConfigError(item.line, "'" + toml::key_str(k) + "' entries must be positive integers");
        }
        out.push_back(static_cast<std::size_t>(item.integer));
      }
    }
  }

  /// All keys under `prefix` (one level), consumed.
  std::vector<std::pair<std::string, const Value*>> children(const Key& prefix) {
    std::vector<std::pair<std::string, const Value*>> out;
    for (const auto& [k, v] : doc_) {
      if (k.size() == prefix.size() + 1 && std::equal(prefix.begin(), prefix.end(), k.begin())) {
        used_.insert(k);
        out.emplace_back(k.back(), &v);
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : doc_) {
      if (!used_.count(k)) throw ConfigError(v.line, "unknown key '" + toml::key_str(k) + "'");
    }
  }

 private:
  const Document& doc_;
  std::filesystem::path base_;
  std::set<Key> used_;
};

inline void read_features(Reader& r, SeveritySection& s) {
  const Key names_key{"severity", "features"};
  if (const auto* v = r.find(names_key)) {
    if (v->kind != Value::Kind::kArray || v->items.empty()) Reader::type_error(names_key, *v, "a non-empty array of names");
    const auto defaults = data::default_patient_features();
    s.features.clear();
    for (const auto& item : v->items) {
      if (item.kind != Value::Kind::kString) throw ConfigError(item.line, "feature names must be strings");
      data::PatientFeature f{item.str, 1, 8};
      for (const auto& d : defaults) {
        if (iequals(d.name, item.str)) f = d;
      }
      s.features.push_back(f);
    }
  }
  // [severity.scales] "Chest Pain" = [1, 9]
  for (const auto& [name, v] : r.children({"severity", "scales"})) {
    if (v->kind != Value::Kind::kArray || v->items.size() != 2 || v->items[0].kind != Value::Kind::kInt ||
        v->items[1].kind != Value::Kind::kInt) {
      throw ConfigError(v->line, "scale for '" + name + "' must be [min, max] integers");
    }
    bool found = false;
    for (auto& f : s.features) {
      if (iequals(f.name, name)) {
        f.lo = static_cast<int>(v->items[0].integer);
        f.hi = static_cast<int>(v->items[1].integer);
        found = true;
      }
    }
    if (!found) throw ConfigError(v->line, "scale given for unselected feature '" + name + "'");
  }
  try {
    data::validate_patient_schema(s.features);
  } catch (const ValidationError& e) {
    throw ConfigError(0, e.what());
  }
}

inline AppConfig build(const Document& doc, const std::filesystem::path& base) {
  AppConfig c;
  Reader r(doc, base);
  r.integer({"seed"}, c.seed);
  c.aqi.train.seed = c.seed;

  r.path({"data", "air_csv"}, c.data.air_csv);
  r.path({"data", "image_root"}, c.data.image_root);
  r.path({"data", "patient_csv"}, c.data.patient_csv);
  r.number({"data", "test_fraction"}, c.data.test_fraction);
  if (!(c.data.test_fraction > 0.0 && c.data.test_fraction < 1.0)) {
    throw ConfigError(0, "data.test_fraction must be in (0, 1)");
  }

  r.string({"extractor", "kind"}, c.aqi.extractor.kind);
  r.integer({"extractor", "seed"}, c.aqi.extractor.seed);
  r.integer({"extractor", "output_dim"}, c.aqi.extractor.output_dim, 1);
  r.integer({"extractor", "grid"}, c.aqi.extractor.grid, 1);
  {
    std::filesystem::path p;
    r.path({"extractor", "path"}, p);
    c.aqi.extractor.onnx_path = p.string();
  }
  if (c.aqi.extractor.kind != "synthetic" && c.aqi.extractor.kind != "onnx") {
    throw ConfigError(0, "extractor.kind must be \"synthetic\" or \"onnx\"");
  }

  r.sizes({"aqi", "hidden"}, c.aqi.mlp.hidden);
  r.number({"aqi", "dropout"}, c.aqi.mlp.dropout_rate);
  r.number({"aqi", "bn_momentum"}, c.aqi.mlp.bn_momentum);
  r.integer({"aqi", "epochs"}, c.aqi.train.epochs, 1);
  r.integer({"aqi", "batch_size"}, c.aqi.train.batch_size, 2);
  r.number({"aqi", "learning_rate"}, c.aqi.train.learning_rate);

  read_features(r, c.severity);
  r.integer({"severity", "k"}, c.severity.k, 1);
  {
    std::string kernel = "rbf";
    r.string({"severity", "svc_kernel"}, kernel);
    if (kernel == "rbf") {
      c.severity.svc.kernel = severity::KernelSpec::Kind::kRbf;
    } else if (kernel == "linear") {
      c.severity.svc.kernel = severity::KernelSpec::Kind::kLinear;
    } else {
      throw ConfigError(0, "severity.svc_kernel must be \"rbf\" or \"linear\"");
    }
  }
  if (const auto* g = r.find({"severity", "svc_gamma"})) {
    if (g->kind == Value::Kind::kString) {
      if (g->str != "scale") throw ConfigError(g->line, "severity.svc_gamma must be \"scale\" or a number");
    } else {
      c.severity.svc.gamma = Reader::as_number({"severity", "svc_gamma"}, *g);
    }
  }
  r.number({"severity", "svc_c"}, c.severity.svc.c);
  r.number({"severity", "svc_tol"}, c.severity.svc.tol);
  r.integer({"severity", "svc_max_passes"}, c.severity.svc.max_passes);
  r.boolean({"severity", "resample"}, c.severity.resample);
  r.string({"severity", "default_model"}, c.severity.default_model);
  c.severity.svc.seed = c.seed;

  r.integer({"resample", "k_neighbors"}, c.resample.smote.k_neighbors, 1);
  r.integer({"resample", "m_neighbors"}, c.resample.smote.m_neighbors, 1);
  r.number({"resample", "extrapolation_step"}, c.resample.smote.extrapolation_step);
  r.integer({"resample", "total"}, c.resample.total, 1);
  for (const auto& [name, v] : r.children({"resample", "targets"})) {
    const auto label = parse_int(name);
    if (!label || *label < kMinSeverity || *label > kMaxSeverity) {
      throw ConfigError(v->line, "resample.targets keys must be severity classes 1..7");
    }
    if (v->kind != Value::Kind::kInt || v->integer <= 0) {
      throw ConfigError(v->line, "resample target for class " + name + " must be a positive integer");
    }
    c.resample.targets[static_cast<int>(*label)] = static_cast<std::size_t>(v->integer);
  }
  try {
    c.resample.smote.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(0, e.what());
  }

  r.path({"output", "models_dir"}, c.models_dir);
  r.path({"output", "reports_dir"}, c.reports_dir);

  r.string({"service", "host"}, c.service.host);
  r.integer({"service", "port"}, c.service.port, 0);
  r.string({"service", "cors_origin"}, c.service.cors_origin);
  c.service.default_model = c.severity.default_model;
  r.string({"service", "default_model"}, c.service.default_model);
  for (const auto* m : {&c.severity.default_model, &c.service.default_model}) {
    if (*m != "knn" && *m != "svc") throw ConfigError(0, "default_model must be \"knn\" or \"svc\"");
  }
  r.reject_unknown();
  return c;
}

}  // namespace config_detail

/// Applies `key=value` overrides (TOML value syntax; bare words are strings).
inline void apply_overrides(toml::Document& doc, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(0, "override '" + o + "' is not key=value");
    toml::Key key;
    toml::Value value;
    try {
      key = toml::parse_key(o.substr(0, eq));
      value = toml::parse_value(trim(o.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(0, "override '" + o + "': " + e.what());
    }
    value.line = 0;  // not from the file
    for (auto& item : value.items) item.line = 0;
    doc[key] = std::move(value);
  }
}

/// Parses config text. `base` anchors relative paths.
inline AppConfig parse_config(std::string_view text, const std::filesystem::path& base,
                              const std::vector<std::string>& overrides = {}) {
  auto doc = toml::parse(text);
  apply_overrides(doc, overrides);
  return config_detail::build(doc, base);
}

/// Reads a config file; with no path, defaults plus overrides.
inline AppConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides = {}) {
  if (!path) return parse_config("", std::filesystem::current_path(), overrides);
  std::string text;
  try {
    text = read_text_file(path->string());
  } catch (const Error&) {
    throw IoError(path->string(), "cannot read config file");
  }
  return parse_config(text, std::filesystem::absolute(*path).parent_path(), overrides);
}

}  // namespace aqilung
