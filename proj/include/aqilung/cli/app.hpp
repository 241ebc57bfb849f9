// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqilung/config.hpp"
#include "aqilung/csv.hpp"
#include "aqilung/pipeline.hpp"
#include "aqilung/report.hpp"
#include "aqilung/service/server.hpp"
#include "aqilung/store/artifact.hpp"
#include "aqilung/store/models.hpp"

namespace aqilung::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitTraining = 4,
  kExitIo = 5,
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kValidation: return kExitValidation;
    case ErrorKind::kNumeric:
    case ErrorKind::kConvergence: return kExitTraining;
    case ErrorKind::kIo: return kExitIo;
  }
  return kExitInternal;
}

/// `aqilung: error code=<code> exit=<n> [field=<json>] message=<json>` on one line.
inline std::string error_line(std::string_view code, int exit, std::string_view message, std::string_view field = {}) {
  std::string out = "aqilung: error code=" + std::string(code) + " exit=" + std::to_string(exit);
  if (!field.empty()) out += " field=" + Json(std::string(field)).dump();
  out += " message=" + Json(std::string(message)).dump() + "\n";
  return out;
}

/// Options shared by every subcommand.
struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;

  AppConfig load() const {
    auto all = overrides;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    return load_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path), all);
  }
};

namespace detail {

inline const std::filesystem::path& require_path(const std::filesystem::path& p, const std::string& key) {
  if (p.empty()) throw ValidationError(key + " is not configured", key);
  return p;
}

inline data::PatientDataset load_patients(const AppConfig& c,
                                          const std::vector<data::PatientFeature>* schema = nullptr) {
  return data::load_patient_dataset(require_path(c.data.patient_csv, "data.patient_csv"),
                                    schema ? *schema : c.severity.features);
}

/// Writes `<reports_dir>/<stem>.txt` and `.json`.
inline void write_report(const AppConfig& c, const std::string& stem, const EvalSummary& s, Json extra = Json::object()) {
  Json j = report_json(s);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  store::write_text_atomic(c.reports_dir / (stem + ".txt"), render_report(s));
  store::write_text_atomic(c.reports_dir / (stem + ".json"), j.dump(2) + "\n");
}

inline Json confusion_json(const severity::EvalReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.confusion) rows.push_back(row);
  return rows;
}

inline std::string breakpoints_digest() {
  return sha256_hex(read_text_file(aqi::default_breakpoint_path()));
}

// "a=1,b=2" -> {a: 1, b: 2}. Integral values stay integers.
inline Json parse_assignments(const std::string& text, const std::string& flag) {
  Json out = Json::object();
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string item = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError(flag + ": '" + item + "' is not name=value");
    const std::string name = trim(item.substr(0, eq));
    const auto v = parse_double(trim(item.substr(eq + 1)));
    if (name.empty() || !v) throw UsageError(flag + ": '" + item + "' is not name=number");
    if (const auto i = parse_int(trim(item.substr(eq + 1)))) {
      out[name] = *i;
    } else {
      out[name] = *v;
    }
  }
  if (out.empty()) throw UsageError(flag + " is empty");
  return out;
}

}  // namespace detail

inline int cmd_ingest(const Globals& g, std::ostream& out) {
  const auto c = g.load();
  if (c.data.air_csv.empty() && c.data.patient_csv.empty()) {
    throw ValidationError("nothing to ingest: configure data.air_csv or data.patient_csv", "data");
  }
  Json rep = Json::object();
  if (!c.data.air_csv.empty()) {
    const auto air = pipeline::load_clean_air(c);
    rep["air"] = {{"rows_read", air.rows_read},
                  {"missing_images", air.missing_images},
                  {"removed_non_india", air.removed_non_india},
                  {"removed_nulls", air.removed_nulls},
                  {"retained", air.records.size()}};
    out << "air: " << air.rows_read << " rows read, " << air.missing_images << " without images, "
        << air.removed_non_india << " outside India, " << air.removed_nulls << " incomplete, " << air.records.size()
        << " retained\n";
  }
  if (!c.data.patient_csv.empty()) {
    const auto p = detail::load_patients(c);
    Json counts = Json::object();
    const auto labeled = p.to_labeled();
    for (const auto& [label, n] : labeled.class_counts()) counts[std::to_string(label)] = n;
    rep["patients"] = {{"rows", p.records.size()}, {"features", p.schema.size()}, {"class_counts", counts}};
    out << "patients: " << p.records.size() << " rows, " << p.schema.size() << " features, classes " << counts.dump()
        << "\n";
  }
  store::write_text_atomic(c.reports_dir / "ingest.json", rep.dump(2) + "\n");
  return kExitOk;
}

inline int cmd_train_aqi(const Globals& g, std::ostream& out) {
  const auto c = g.load();
  const auto air = pipeline::load_clean_air(c);
  const auto extractor = make_extractor(c.aqi.extractor);
  const auto t = pipeline::train_aqi(air.records, c, *extractor);
  store::ArtifactMeta meta;
  meta.seed = c.seed;
  meta.metrics = {{"train_category_accuracy", t.scores.train_category_accuracy},
                  {"test_category_accuracy", t.scores.test_category_accuracy},
                  {"test_mse", t.scores.test_mse},
                  {"test_r2", t.scores.test_r2}};
  meta.breakpoints_sha256 = detail::breakpoints_digest();
  store::save_aqi_model(t.model, c.models_dir / "aqi", meta);
  detail::write_report(c, "aqi_report", t.summary(),
                       {{"train_rows", t.train_rows},
                        {"test_rows", t.test_rows},
                        {"final_loss", t.loss_history.empty() ? 0.0 : t.loss_history.back()}});
  out << render_report(t.summary());
  out << "saved " << (c.models_dir / "aqi").string() << "\n";
  return kExitOk;
}

inline int cmd_train_severity(const Globals& g, std::ostream& out) {
  const auto c = g.load();
  const auto patients = detail::load_patients(c);
  const auto t = pipeline::train_severity(patients, c);
  store::ArtifactMeta knn_meta;
  knn_meta.seed = c.seed;
  knn_meta.metrics = {{"train_accuracy", t.knn_train.accuracy}, {"test_accuracy", t.knn_test.accuracy}};
  auto svc_meta = knn_meta;
  svc_meta.metrics = {{"train_accuracy", t.svc_train.accuracy}, {"test_accuracy", t.svc_test.accuracy}};
  store::save_severity_model(t.knn, c.models_dir / "knn", knn_meta);
  store::save_severity_model(t.svc, c.models_dir / "svc", svc_meta);
  detail::write_report(c, "severity_report", t.summary(),
                       {{"train_rows", t.train_rows},
                        {"test_rows", t.test_rows},
                        {"resampled", c.severity.resample},
                        {"confusion",
                         {{"KNN", detail::confusion_json(t.knn_test)}, {"SVC", detail::confusion_json(t.svc_test)}}}});
  out << render_report(t.summary());
  out << "saved " << (c.models_dir / "knn").string() << " and " << (c.models_dir / "svc").string() << "\n";
  return kExitOk;
}

/// Resamples the whole (normalized) patient set to the configured plan and
/// writes it as CSV.
inline int cmd_resample(const Globals& g, const std::string& output, std::ostream& out) {
  const auto c = g.load();
  const auto patients = detail::load_patients(c);
  const auto norm = data::normalize_features(patients.to_labeled());
  const auto res = pipeline::resample(norm.data, c);
  std::string csv;
  for (const auto& f : patients.schema) csv += f.name + ",";
  csv += std::string(data::kSeverityColumn) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < res.size(); ++i) {
    for (double v : res.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      csv += buf;
    }
    csv += std::to_string(res.labels[i]) + "\n";
  }
  const std::filesystem::path path = output.empty() ? c.reports_dir / "resampled.csv" : std::filesystem::path(output);
  store::write_text_atomic(path, csv);
  Json before = Json::object(), after = Json::object();
  for (const auto& [label, n] : norm.data.class_counts()) before[std::to_string(label)] = n;
  for (const auto& [label, n] : res.class_counts()) after[std::to_string(label)] = n;
  out << "resampled " << norm.data.size() << " -> " << res.size() << " rows\n";
  out << "before " << before.dump() << "\nafter  " << after.dump() << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

/// Scores saved artifacts on the configured data with the configured split.
inline int cmd_evaluate(const Globals& g, std::ostream& out) {
  namespace fs = std::filesystem;
  const auto c = g.load();
  EvalSummary summary;
  Json extra = Json::object();
  std::vector<SeverityModel> severity_models;
  for (const auto* name : {"knn", "svc"}) {
    if (fs::exists(c.models_dir / name / store::kManifestFile)) {
      severity_models.push_back(store::load_severity_model(c.models_dir / name).model);
    }
  }
  if (!severity_models.empty() && !c.data.patient_csv.empty()) {
    const auto patients = detail::load_patients(c, &severity_models.front().schema);
    const auto d = pipeline::prepare_severity_data(patients, c);
    for (const auto& m : severity_models) {
      if (!(m.normalization == d.spec)) {
        throw SchemaError("the " + std::string(severity_kind_name(m.kind())) +
                          " artifact was trained with a different normalization; evaluate with its training config");
      }
      auto score = [&](const LabeledDataset& data) {
        return std::visit([&](const auto& clf) { return severity::evaluate(clf, data); }, m.classifier);
      };
      const auto tr = score(d.train), te = score(d.test);
      const std::string label = m.kind() == SeverityKind::kKnn ? "KNN" : "SVC";
      summary.models.push_back({label, tr.accuracy, te.accuracy});
      extra["confusion"][label] = detail::confusion_json(te);
    }
  }
  if (fs::exists(c.models_dir / "aqi" / store::kManifestFile) && !c.data.air_csv.empty()) {
    const auto model = store::load_aqi_model(c.models_dir / "aqi").model;
    const auto extractor = make_extractor(model.extractor);
    const auto air = pipeline::load_clean_air(c);
    const auto split = data::split_indices(air.records.size(), pipeline::split_config(c));
    std::vector<data::AirSampleRecord> train, test;
    for (auto i : split.train) train.push_back(air.records[i]);
    for (auto i : split.test) test.push_back(air.records[i]);
    const auto tr = data::build_air_matrices(train, *extractor);
    const auto te = data::build_air_matrices(test, *extractor);
    const auto s = pipeline::score_aqi(model, tr.features, tr.targets, te.features, te.targets);
    summary.models.push_back({"MLP (AQI category)", s.train_category_accuracy, s.test_category_accuracy});
    summary.regression = RegressionScore{s.test_mse, s.test_r2};
  }
  detail::write_report(c, "evaluation_report", summary, extra);
  out << render_report(summary);
  return kExitOk;
}

struct PredictOptions {
  std::string models_dir;
  std::string breakpoints;
  std::string image;
  std::string readings;
  std::string city;
  std::string timestamp;
  std::string features;
  std::optional<double> aqi;
  std::string model;
};

/// One-off prediction through the same handlers the service uses.
inline int cmd_predict(const Globals& g, const PredictOptions& o, std::ostream& out, std::ostream& err) {
  const auto c = g.load();
  const std::filesystem::path models = o.models_dir.empty() ? c.models_dir : std::filesystem::path(o.models_dir);
  const std::string bp = o.breakpoints.empty() ? aqi::default_breakpoint_path() : o.breakpoints;
  Json req = Json::object();
  std::string path;
  if (!o.features.empty()) {
    if (!o.image.empty() || !o.readings.empty()) throw UsageError("--features cannot be combined with --image or --readings");
    path = "/predict/severity";
    req["features"] = detail::parse_assignments(o.features, "--features");
    if (o.aqi) req["aqi"] = *o.aqi;
    if (!o.model.empty()) req["model"] = o.model;
  } else {
    if (o.image.empty() == o.readings.empty()) throw UsageError("give exactly one of --image, --readings or --features");
    path = "/predict/aqi";
    if (!o.image.empty()) {
      const auto bytes = store::detail::read_all(o.image);
      req["image_base64"] = service::encode_base64(bytes);
    } else {
      req["readings"] = detail::parse_assignments(o.readings, "--readings");
    }
    if (!o.city.empty()) req["city"] = o.city;
    if (!o.timestamp.empty()) req["timestamp"] = o.timestamp;
  }
  const auto snap = service::load_snapshot(models, bp, c.service.default_model);
  const auto r = service::dispatch(*snap, "POST", path, service::to_body(req));
  if (r.status != 200) {
    const auto e = Json::parse(r.body);
    const int code = r.status == 503 ? kExitIo : kExitValidation;
    err << error_line(e.value("code", "request"), code, e.value("message", ""), e.value("field", ""));
    return code;
  }
  out << r.body;
  return kExitOk;
}

struct ServeOptions {
  std::string models_dir;
  std::string breakpoints;
  std::string host;
  std::optional<int> port;
  std::string cors_origin;
  std::string model;
};

/// Blocks until SIGINT or SIGTERM. SIGHUP reloads the model directory.
inline int cmd_serve(const Globals& g, const ServeOptions& o, std::ostream& out, std::ostream& err) {
  const auto c = g.load();
  service::ServerOptions opts;
  opts.models_dir = o.models_dir.empty() ? c.models_dir : std::filesystem::path(o.models_dir);
  opts.breakpoints_path = o.breakpoints.empty() ? aqi::default_breakpoint_path() : o.breakpoints;
  opts.host = o.host.empty() ? c.service.host : o.host;
  opts.port = o.port ? *o.port : c.service.port;
  opts.cors_origin = o.cors_origin.empty() ? c.service.cors_origin : o.cors_origin;
  opts.default_model = o.model.empty() ? c.service.default_model : o.model;

  // Signals go to a dedicated thread via sigwait; block them everywhere else first.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGHUP);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  service::ServiceState state(opts);
  httplib::Server server;
  service::install_routes(server, state);
  const int port = opts.port == 0 ? server.bind_to_any_port(opts.host) : (server.bind_to_port(opts.host, opts.port) ? opts.port : -1);
  if (port < 0) throw IoError(opts.host + ":" + std::to_string(opts.port), "cannot bind");
  out << "listening on http://" << opts.host << ":" << port << " models=" << opts.models_dir.string() << std::endl;

  std::atomic<bool> stopping{false};
  std::thread signals([&] {
    while (true) {
      int sig = 0;
      if (sigwait(&set, &sig) != 0) continue;
      if (sig == SIGHUP) {
        try {
          state.reload();
          err << "aqilung: reloaded " << opts.models_dir.string() << std::endl;
        } catch (const std::exception& e) {
          err << "aqilung: reload failed, keeping previous models: " << e.what() << std::endl;
        }
        continue;
      }
      stopping = true;
      server.stop();
      return;
    }
  });
  server.listen_after_bind();
  // Wake the signal thread if the server stopped for another reason.
  if (!stopping) pthread_kill(signals.native_handle(), SIGTERM);
  signals.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  return kExitOk;
}

/// Parses argv and runs one subcommand. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Air quality and lung disease severity prediction", "aqilung"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config", g.config_path, "TOML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--set", g.overrides, "Override a config key, e.g. --set severity.k=7")->take_all();

  int status = kExitOk;
  std::string resample_out;
  PredictOptions po;
  ServeOptions so;

  auto* ingest = app.add_subcommand("ingest", "Load and validate the configured datasets");
  auto* train_aqi = app.add_subcommand("train-aqi", "Train the image-to-AQI regressor");
  auto* train_sev = app.add_subcommand("train-severity", "Train the KNN and SVC severity classifiers");
  auto* resample = app.add_subcommand("resample", "Rebalance the patient data and write it as CSV");
  resample->add_option("-o,--output", resample_out, "Output CSV (default <reports_dir>/resampled.csv)");
  auto* evaluate = app.add_subcommand("evaluate", "Score saved models and print the accuracy table");
  auto* predict = app.add_subcommand("predict", "Predict AQI or severity from saved models");
  predict->add_option("--models", po.models_dir, "Model directory (default output.models_dir)");
  predict->add_option("--breakpoints", po.breakpoints, "Breakpoint table CSV");
  predict->add_option("--image", po.image, "Photo (PNG or JPEG)");
  predict->add_option("--readings", po.readings, "Pollutant readings, e.g. PM2.5=35.4,CO=1.2");
  predict->add_option("--city", po.city, "City for the image path");
  predict->add_option("--timestamp", po.timestamp, "YYYY-MM-DD HH[:MM] for the image path");
  predict->add_option("--features", po.features, "Patient features, e.g. Age=44,Gender=1,...");
  predict->add_option("--aqi", po.aqi, "AQI used to fill the exposure feature");
  predict->add_option("--model", po.model, "knn or svc");
  auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve->add_option("--models", so.models_dir, "Model directory (default output.models_dir)");
  serve->add_option("--breakpoints", so.breakpoints, "Breakpoint table CSV");
  serve->add_option("--host", so.host, "Bind address");
  serve->add_option("--port", so.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--cors-origin", so.cors_origin, "Access-Control-Allow-Origin value");
  serve->add_option("--model", so.model, "Default severity model (knn or svc)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    std::string msg = e.what();
    if (const auto rest = app.remaining(); !rest.empty() && app.get_subcommands().empty()) {
      msg = "unknown subcommand '" + rest.front() + "'";
    }
    err << app.help();
    err << error_line("usage", kExitUsage, msg);
    return kExitUsage;
  }

  try {
    if (*ingest) status = cmd_ingest(g, out);
    if (*train_aqi) status = cmd_train_aqi(g, out);
    if (*train_sev) status = cmd_train_severity(g, out);
    if (*resample) status = cmd_resample(g, resample_out, out);
    if (*evaluate) status = cmd_evaluate(g, out);
    if (*predict) status = cmd_predict(g, po, out, err);
    if (*serve) status = cmd_serve(g, so, out, err);
  } catch (const ValidationError& e) {
    err << error_line(e.code(), exit_code(e.kind()), e.what(), e.field());
    return exit_code(e.kind());
  } catch (const ParseError& e) {
    err << error_line(e.code(), exit_code(e.kind()), e.what(), e.column());
    return exit_code(e.kind());
  } catch (const Error& e) {
    err << error_line(e.code(), exit_code(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << error_line("io", kExitIo, e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    err << error_line("internal", kExitInternal, e.what());
    return kExitInternal;
  }
  return status;
}

}  // namespace aqilung::cli
