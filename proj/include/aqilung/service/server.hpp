// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include <httplib.h>

#include "aqilung/service/api.hpp"

namespace aqilung::service {

struct ServerOptions {
  std::filesystem::path models_dir;
  std::filesystem::path breakpoints_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::string default_model = "knn";
};

/// Holds the current snapshot. Requests copy the shared pointer under a
/// short lock, so a reload never changes a request mid-flight.
class ServiceState {
 public:
  explicit ServiceState(ServerOptions options) : options_(std::move(options)) { reload(); }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(mu_);
    return snapshot_;
  }

  /// Rebuilds the snapshot from disk. On failure the old one stays.
  void reload() {
    std::lock_guard reload_lock(reload_mu_);
    auto next = load_snapshot(options_.models_dir, options_.breakpoints_path, options_.default_model);
    std::lock_guard lock(mu_);
    snapshot_ = std::move(next);
  }

  const ServerOptions& options() const noexcept { return options_; }

 private:
  ServerOptions options_;
  mutable std::mutex mu_;
  std::mutex reload_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

/// Registers the API routes and CORS handling on `server`.
inline void install_routes(httplib::Server& server, ServiceState& state) {
  const std::string origin = state.options().cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Vary", "Origin"}});
  auto run = [&state](const httplib::Request& req, httplib::Response& res) {
    const auto snap = state.snapshot();
    const std::string model = req.has_param("model") ? req.get_param_value("model") : std::string();
    const auto r = dispatch(*snap, req.method, req.path, req.body, model);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/health", run);
  server.Get("/schema", run);
  server.Post("/predict/aqi", run);
  server.Post("/predict/severity", run);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto r = error_response({res.status, res.status == 404 ? "not_found" : "http_error",
                                   "no route for " + req.method + " " + req.path, {}});
    res.set_content(r.body, "application/json");
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    const auto r = error_response({500, "internal", msg, {}});
    res.status = 500;
    res.set_content(r.body, "application/json");
  });
}

}  // namespace aqilung::service
