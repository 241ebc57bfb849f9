// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqilung/aqi/breakpoints.hpp"
#include "aqilung/aqi/index.hpp"
#include "aqilung/data/air.hpp"
#include "aqilung/error.hpp"
#include "aqilung/models.hpp"
#include "aqilung/severity/exposure.hpp"
#include "aqilung/store/models.hpp"
#include "aqilung/vision/image.hpp"
#include "aqilung/vision/metadata.hpp"
#include "aqilung/vision/preprocess.hpp"

namespace aqilung::service {

using Json = nlohmann::ordered_json;

/// Serializes with every float at 17 significant digits so responses are
/// byte-stable. Integral JSON numbers stay integers.
inline void write_json(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_json(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_json(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string to_body(const Json& j) {
  std::string out;
  write_json(j, out);
  out += '\n';
  return out;
}

/// Strict standard base64 (RFC 4648 alphabet, padded). Whitespace is not
/// accepted.
inline std::optional<std::vector<std::uint8_t>> decode_base64(std::string_view text) {
  if (text.empty() || text.size() % 4 != 0) return std::nullopt;
  for (char c : text) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                    c == '/' || c == '=';
    if (!ok) return std::nullopt;
  }
  const std::size_t pad = text.ends_with("==") ? 2 : text.ends_with('=') ? 1 : 0;
  if (text.substr(0, text.size() - pad).find('=') != std::string_view::npos) return std::nullopt;
  std::vector<std::uint8_t> out(text.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) return std::nullopt;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

inline std::string encode_base64(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

/// Everything a request can read. Immutable once built.
struct Snapshot {
  std::filesystem::path models_dir;
  aqi::BreakpointTable breakpoints;
  severity::ExposureMap exposure;
  std::optional<AqiModel> aqi_model;
  std::shared_ptr<const vision::FeatureExtractor> extractor;
  std::optional<SeverityModel> knn;
  std::optional<SeverityModel> svc;
  std::string default_model = "knn";

  std::vector<std::string> model_names() const {
    std::vector<std::string> out;
    if (aqi_model) out.emplace_back(store::kAqiKind);
    if (knn) out.emplace_back(store::kKnnKind);
    if (svc) out.emplace_back(store::kSvcKind);
    return out;
  }

  const SeverityModel* severity_model(std::string_view name) const {
    if (name == "knn") return knn ? &*knn : nullptr;
    if (name == "svc") return svc ? &*svc : nullptr;
    return nullptr;
  }

  /// Feature schema shown to clients: from a loaded classifier, else the default list.
  std::vector<data::PatientFeature> feature_schema() const {
    if (knn) return knn->schema;
    if (svc) return svc->schema;
    return data::default_patient_features();
  }
};

/// Artifacts are looked up as `<models_dir>/{aqi,knn,svc}`. The directory
/// must exist and hold at least one of them.
inline std::shared_ptr<const Snapshot> load_snapshot(const std::filesystem::path& models_dir,
                                                     const std::filesystem::path& breakpoints_path,
                                                     std::string default_model = "knn") {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(models_dir, ec)) throw IoError(models_dir.string(), "model directory does not exist");
  auto s = std::make_shared<Snapshot>();
  s->models_dir = models_dir;
  s->breakpoints = aqi::load_breakpoint_table(breakpoints_path.string());
  s->default_model = std::move(default_model);
  if (fs::exists(models_dir / "aqi" / store::kManifestFile)) {
    s->aqi_model = store::load_aqi_model(models_dir / "aqi").model;
    s->extractor = make_extractor(s->aqi_model->extractor);
  }
  if (fs::exists(models_dir / "knn" / store::kManifestFile)) {
    s->knn = store::load_severity_model(models_dir / "knn", SeverityKind::kKnn).model;
  }
  if (fs::exists(models_dir / "svc" / store::kManifestFile)) {
    s->svc = store::load_severity_model(models_dir / "svc", SeverityKind::kSvc).model;
  }
  if (s->model_names().empty()) throw IoError(models_dir.string(), "no model artifacts (aqi, knn, svc) found");
  if (s->knn && s->svc && s->knn->schema != s->svc->schema) {
    throw SchemaError("knn and svc artifacts were trained on different feature schemas");
  }
  if (!s->severity_model(s->default_model)) {
    s->default_model = s->knn ? "knn" : "svc";
  }
  return s;
}

struct Response {
  int status = 200;
  std::string body;
};

/// A request problem reported to the client as {code, message, field?}.
struct RequestError {
  int status = 400;
  std::string code;
  std::string message;
  std::string field;
};

inline Response error_response(const RequestError& e) {
  Json j{{"code", e.code}, {"message", e.message}};
  if (!e.field.empty()) j["field"] = e.field;
  return {e.status, to_body(j)};
}

namespace detail {

[[noreturn]] inline void reject(std::string code, std::string message, std::string field = {}, int status = 400) {
  throw RequestError{status, std::move(code), std::move(message), std::move(field)};
}

inline Json parse_body(std::string_view body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    reject("invalid_json", std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) reject("invalid_json", "request body must be a JSON object");
  return j;
}

inline Json category_json(double aqi_value) {
  const auto c = aqi::categorize(std::max(0.0, aqi_value));
  const auto& info = aqi::category_info(c.category);
  return {{"id", info.id}, {"label", info.label}, {"color", info.color}, {"out_of_scale", c.out_of_scale}};
}

inline vision::MetadataRecord metadata(const Json& req) {
  if (!req.contains("city") || !req["city"].is_string()) reject("invalid_request", "city must be a string", "city");
  if (!req.contains("timestamp") || !req["timestamp"].is_string()) {
    reject("invalid_request", "timestamp must be a string", "timestamp");
  }
  const auto city = req["city"].get<std::string>();
  if (!vision::city_index(city)) reject("invalid_request", "unknown city '" + city + "'", "city");
  try {
    return {city, vision::parse_timestamp(req["timestamp"].get<std::string>())};
  } catch (const Error& e) {
    reject("invalid_request", e.what(), "timestamp");
  }
}

inline Response predict_from_readings(const Snapshot& s, const Json& req) {
  const auto& readings = req["readings"];
  if (!readings.is_object() || readings.empty()) {
    reject("invalid_request", "readings must be a non-empty object of pollutant concentrations", "readings");
  }
  aqi::PollutantReadings parsed;
  Json echo = Json::object();
  for (auto it = readings.begin(); it != readings.end(); ++it) {
    const auto kind = aqi::parse_pollutant(it.key());
    if (!kind) reject("invalid_request", "unknown pollutant '" + it.key() + "'", "readings." + it.key());
    if (!it.value().is_number()) reject("invalid_request", it.key() + " must be a number", "readings." + it.key());
    const double v = it.value().get<double>();
    if (!std::isfinite(v) || v < 0.0) {
      reject("invalid_request", it.key() + " must be a non-negative number", "readings." + it.key());
    }
    parsed[*kind] = v;
  }
  for (const auto& [kind, v] : parsed) echo[std::string(aqi::pollutant_name(kind))] = v;
  aqi::CompositeAqi c;
  try {
    c = aqi::composite_aqi(parsed, s.breakpoints);
  } catch (const OverflowError& e) {
    reject("out_of_range", e.what(), "readings");
  } catch (const DomainError& e) {
    reject("invalid_request", e.what(), "readings");
  }
  Json out{{"source", "readings"},
           {"pollutants", echo},
           {"aqi", c.aqi},
           {"category", category_json(c.aqi)},
           {"dominant", aqi::pollutant_name(c.dominant)}};
  return {200, to_body(out)};
}

inline Response predict_from_image(const Snapshot& s, const Json& req) {
  if (!req["image_base64"].is_string()) reject("invalid_request", "image_base64 must be a string", "image_base64");
  if (!s.aqi_model) reject("model_unavailable", "no AQI model is loaded", {}, 503);
  const auto meta = metadata(req);
  const auto bytes = decode_base64(req["image_base64"].get<std::string>());
  if (!bytes) reject("invalid_base64", "image_base64 is not valid base64", "image_base64");
  vision::RawImage raw;
  try {
    raw = vision::decode_image(*bytes);
  } catch (const DecodeError& e) {
    reject("decode_error", e.what(), "image_base64");
  }
  const auto features = vision::extract_features(vision::preprocess(raw), *s.extractor);
  const auto fused = vision::fuse(features, vision::encode_metadata(meta));
  const auto pred = s.aqi_model->predict(Tensor({1, fused.size()}, {fused.data().begin(), fused.data().end()}));
  Json pollutants = Json::object();
  for (std::size_t i = 0; i < data::kAirTargets.size(); ++i) pollutants[std::string(data::kAirTargets[i])] = pred(0, i);
  const double aqi_value = std::max(0.0, pred(0, 0));
  Json out{{"source", "image"}, {"pollutants", pollutants}, {"aqi", aqi_value}, {"category", category_json(aqi_value)}};
  // Dominant pollutant from the predicted concentrations, when they are on the table's scale.
  aqi::PollutantReadings r;
  for (std::size_t i = 1; i < data::kAirTargets.size(); ++i) {
    if (const auto k = aqi::parse_pollutant(data::kAirTargets[i]); k && s.breakpoints.covers(*k)) {
      r[*k] = std::max(0.0, pred(0, i));
    }
  }
  if (!r.empty()) {
    out["dominant"] = aqi::pollutant_name(aqi::composite_aqi(r, s.breakpoints, aqi::OverflowPolicy::kClamp).dominant);
  }
  return {200, to_body(out)};
}

}  // namespace detail

/// POST /predict/aqi
inline Response predict_aqi(const Snapshot& s, std::string_view body) {
  try {
    const auto req = detail::parse_body(body);
    const bool has_image = req.contains("image_base64") && !req["image_base64"].is_null();
    const bool has_readings = req.contains("readings") && !req["readings"].is_null();
    if (has_image == has_readings) {
      detail::reject("invalid_request", "exactly one of image_base64 or readings is required",
                     "image_base64,readings");
    }
    if (has_readings) {
      // Metadata is optional here but must be valid when present.
      if (req.contains("city") || req.contains("timestamp")) detail::metadata(req);
      return detail::predict_from_readings(s, req);
    }
    return detail::predict_from_image(s, req);
  } catch (const RequestError& e) {
    return error_response(e);
  }
}

/// POST /predict/severity. `query_model` is the `model` query parameter, if any.
inline Response predict_severity(const Snapshot& s, std::string_view body, std::string_view query_model = {}) {
  try {
    const auto req = detail::parse_body(body);
    std::string model_name = std::string(query_model);
    if (req.contains("model")) {
      if (!req["model"].is_string()) detail::reject("invalid_request", "model must be \"knn\" or \"svc\"", "model");
      model_name = req["model"].get<std::string>();
    }
    if (model_name.empty()) model_name = s.default_model;
    if (model_name != "knn" && model_name != "svc") {
      detail::reject("invalid_request", "model must be \"knn\" or \"svc\"", "model");
    }
    const SeverityModel* model = s.severity_model(model_name);
    if (!model) detail::reject("model_unavailable", "no " + model_name + " model is loaded", "model", 503);

    std::optional<double> aqi_value;
    if (req.contains("aqi") && !req["aqi"].is_null()) {
      if (!req["aqi"].is_number() || !std::isfinite(req["aqi"].get<double>()) || req["aqi"].get<double>() < 0.0) {
        detail::reject("invalid_request", "aqi must be a non-negative number", "aqi");
      }
      aqi_value = req["aqi"].get<double>();
    }
    if (!req.contains("features") || !req["features"].is_object()) {
      detail::reject("invalid_request", "features must be an object of named integers", "features");
    }
    const auto& given = req["features"];
    for (auto it = given.begin(); it != given.end(); ++it) {
      bool known = false;
      for (const auto& f : model->schema) known = known || f.name == it.key();
      if (!known) detail::reject("invalid_request", "unknown feature '" + it.key() + "'", "features." + it.key());
    }
    std::vector<double> row;
    std::optional<int> exposure;
    for (const auto& f : model->schema) {
      const bool is_exposure = iequals(f.name, data::kExposureFeature);
      const std::string field = "features." + f.name;
      if (!given.contains(f.name) || given[f.name].is_null()) {
        if (is_exposure && aqi_value) {
          exposure = severity::aqi_to_exposure(*aqi_value, s.exposure);
          row.push_back(*exposure);
          continue;
        }
        detail::reject("invalid_request", "missing feature '" + f.name + "'", field);
      }
      const auto& v = given[f.name];
      if (!v.is_number_integer()) detail::reject("invalid_request", f.name + " must be an integer", field);
      const auto n = v.get<std::int64_t>();
      if (n < f.lo || n > f.hi) {
        detail::reject("out_of_scale",
                       f.name + " = " + std::to_string(n) + " is outside " + std::to_string(f.lo) + ".." +
                           std::to_string(f.hi),
                       field);
      }
      if (is_exposure) exposure = static_cast<int>(n);
      row.push_back(static_cast<double>(n));
    }
    Json out{{"severity", model->predict(row)}, {"model_used", model_name}};
    out["exposure_level"] = exposure ? Json(*exposure) : Json(nullptr);
    return {200, to_body(out)};
  } catch (const RequestError& e) {
    return error_response(e);
  }
}

/// GET /health
inline Response health(const Snapshot& s) {
  return {200, to_body({{"status", "ok"}, {"models", s.model_names()}, {"schema_version", store::kSchemaVersion}})};
}

/// GET /schema: everything a client form needs, so it never hard-codes it.
inline Response schema(const Snapshot& s) {
  Json features = Json::array();
  for (const auto& f : s.feature_schema()) {
    features.push_back({{"name", f.name}, {"min", f.lo}, {"max", f.hi},
                        {"filled_by_aqi", iequals(f.name, data::kExposureFeature)}});
  }
  Json categories = Json::array();
  for (const auto& c : aqi::kCategories) {
    categories.push_back(
        {{"id", c.id}, {"label", c.label}, {"index_lo", c.index_lo}, {"index_hi", c.index_hi}, {"color", c.color}});
  }
  Json targets = Json::array();
  for (auto t : data::kAirTargets) targets.push_back(std::string(t));
  Json cities = Json::array();
  for (auto c : vision::kCities) cities.push_back(std::string(c));
  Json models = Json::array();
  for (const char* m : {"knn", "svc"}) {
    if (s.severity_model(m)) models.push_back(m);
  }
  Json out{{"features", features},
           {"severity_range", {kMinSeverity, kMaxSeverity}},
           {"severity_models", models},
           {"default_model", s.default_model},
           {"aqi_model", s.aqi_model.has_value()},
           {"targets", targets},
           {"cities", cities},
           {"categories", categories},
           {"exposure_upper_bounds", s.exposure.upper_bounds}};
  return {200, to_body(out)};
}

/// Routes a request; used by the HTTP server and directly by tests.
inline Response dispatch(const Snapshot& s, std::string_view method, std::string_view path, std::string_view body,
                         std::string_view query_model = {}) {
  try {
    if (path == "/health") {
      if (method != "GET") return error_response({405, "method_not_allowed", "use GET", {}});
      return health(s);
    }
    if (path == "/schema") {
      if (method != "GET") return error_response({405, "method_not_allowed", "use GET", {}});
      return schema(s);
    }
    if (path == "/predict/aqi" || path == "/predict/severity") {
      if (method != "POST") return error_response({405, "method_not_allowed", "use POST", {}});
      return path == "/predict/aqi" ? predict_aqi(s, body) : predict_severity(s, body, query_model);
    }
    return error_response({404, "not_found", "no route for " + std::string(path), {}});
  } catch (const Error& e) {
    return error_response({500, e.code(), e.what(), {}});
  }
}

}  // namespace aqilung::service
