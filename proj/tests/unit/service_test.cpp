// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "aqilung/service/server.hpp"
#include "support/fixture_models.hpp"
#include "support/service_cases.hpp"
#include "support/tempdir.hpp"

namespace aqilung::service {
namespace {

using testing_support::TempDir;

class ServiceFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("aqilung-svc");
    testing_support::build_fixture_models(dir_->path());
    snap_ = load_snapshot(dir_->path(), aqi::default_breakpoint_path());
  }
  static void TearDownTestSuite() {
    snap_.reset();
    delete dir_;
  }
  static const Snapshot& snap() { return *snap_; }

  static TempDir* dir_;
  static std::shared_ptr<const Snapshot> snap_;
};

TempDir* ServiceFixture::dir_ = nullptr;
std::shared_ptr<const Snapshot> ServiceFixture::snap_;

using testing_support::image_request;
using testing_support::severity_features;

/// Compares with tests/golden/<name>; AQILUNG_UPDATE_GOLDENS=1 rewrites it.
void expect_golden(const std::string& name, const Response& r, int status) {
  EXPECT_EQ(r.status, status) << r.body;
  const auto path = std::filesystem::path(AQILUNG_GOLDEN_DIR) / name;
  if (std::getenv("AQILUNG_UPDATE_GOLDENS")) {
    std::ofstream(path, std::ios::binary) << r.body;
    return;
  }
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << "missing golden " << path;
  const std::string want((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(r.body, want) << name;
}

TEST_F(ServiceFixture, ResponsesMatchGoldens) {
  for (const auto& c : testing_support::golden_cases()) {
    SCOPED_TRACE(c.file);
    expect_golden(c.file, dispatch(snap(), c.method, c.path, c.body, c.query_model), c.status);
  }
}

TEST_F(ServiceFixture, SchemaHasElevenFeaturesAndCategories) {
  const auto j = Json::parse(dispatch(snap(), "GET", "/schema", "").body);
  EXPECT_EQ(j["features"].size(), 11u);
  EXPECT_EQ(j["categories"].size(), 6u);
}

TEST_F(ServiceFixture, ImagePredictionHasSevenPollutantsAndMatchingCategory) {
  const auto j = Json::parse(dispatch(snap(), "POST", "/predict/aqi", image_request()).body);
  EXPECT_EQ(j["pollutants"].size(), 7u);
  EXPECT_EQ(j["category"]["id"], aqi::category_info(aqi::categorize(j["aqi"].get<double>()).category).id);
}

TEST_F(ServiceFixture, PredictAqiFromSingleReadingIsThatSubindex) {
  const auto j = Json::parse(dispatch(snap(), "POST", "/predict/aqi", R"({"readings": {"PM2.5": 35.4}})").body);
  EXPECT_EQ(j["aqi"].get<double>(), aqi::subindex(35.4, aqi::PollutantKind::kPM25, snap().breakpoints));
  EXPECT_EQ(j["dominant"], "PM2.5");
}

TEST_F(ServiceFixture, MoreRequestErrors) {
  const auto bad_img = dispatch(snap(), "POST", "/predict/aqi",
                                to_body({{"image_base64", encode_base64(std::vector<std::uint8_t>{1, 2, 3, 4, 5})},
                                         {"city", "ITO"},
                                         {"timestamp", "2023-03-14 08:00"}}));
  EXPECT_EQ(bad_img.status, 400);
  EXPECT_EQ(Json::parse(bad_img.body)["code"], "decode_error");
  const auto bad_city = dispatch(snap(), "POST", "/predict/aqi",
                                 R"({"image_base64": "AAAA", "city": "Kathmandu", "timestamp": "2023-03-14 08:00"})");
  EXPECT_EQ(Json::parse(bad_city.body)["field"], "city");
  EXPECT_EQ(dispatch(snap(), "GET", "/predict/aqi", "").status, 405);
  EXPECT_EQ(dispatch(snap(), "GET", "/nope", "").status, 404);
}

TEST_F(ServiceFixture, SeverityModelSelection) {
  const auto via_query =
      dispatch(snap(), "POST", "/predict/severity", to_body({{"features", severity_features()}}), "svc");
  EXPECT_EQ(Json::parse(via_query.body)["model_used"], "svc");
  const auto bad = dispatch(snap(), "POST", "/predict/severity",
                            to_body({{"features", severity_features()}, {"model", "forest"}}));
  EXPECT_EQ(Json::parse(bad.body)["field"], "model");
}

TEST_F(ServiceFixture, AqiFillsExposureWhenOmitted) {
  auto f = severity_features();
  f.erase("Air Pollution");
  const auto r = dispatch(snap(), "POST", "/predict/severity", to_body({{"features", f}, {"aqi", 500}}));
  EXPECT_EQ(Json::parse(r.body)["exposure_level"], 8);
  const auto missing = dispatch(snap(), "POST", "/predict/severity", to_body({{"features", f}}));
  EXPECT_EQ(missing.status, 400);
  EXPECT_EQ(Json::parse(missing.body)["field"], "features.Air Pollution");
  // An explicit value wins over the aqi fill.
  const auto both = dispatch(snap(), "POST", "/predict/severity",
                             to_body({{"features", severity_features()}, {"aqi", 500}}));
  EXPECT_EQ(Json::parse(both.body)["exposure_level"], 5);
}

TEST_F(ServiceFixture, SeverityOutOfScaleNamesField) {
  auto f = severity_features();
  f["Smoking"] = 2.5;
  EXPECT_EQ(Json::parse(dispatch(snap(), "POST", "/predict/severity", to_body({{"features", f}})).body)["field"],
            "features.Smoking");
  f["Smoking"] = 3;
  f["Height"] = 170;
  EXPECT_EQ(Json::parse(dispatch(snap(), "POST", "/predict/severity", to_body({{"features", f}})).body)["field"],
            "features.Height");
}

TEST_F(ServiceFixture, ConcurrentIdenticalRequestsReturnIdenticalBodies) {
  const std::string body = image_request();
  const auto want = dispatch(snap(), "POST", "/predict/aqi", body).body;
  std::vector<std::string> got(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < got.size(); ++t) {
    threads.emplace_back([&, t] { got[t] = dispatch(snap(), "POST", "/predict/aqi", body).body; });
  }
  for (auto& th : threads) th.join();
  for (const auto& g : got) EXPECT_EQ(g, want);
}

TEST_F(ServiceFixture, HttpServerServesRoutesWithCors) {
  ServiceState state({dir_->path(), aqi::default_breakpoint_path(), "127.0.0.1", 0, "http://dash.example", "knn"});
  httplib::Server server;
  install_routes(server, state);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  const auto h = client.Get("/health");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  EXPECT_EQ(h->get_header_value("Access-Control-Allow-Origin"), "http://dash.example");
  const auto p = client.Post("/predict/severity", to_body({{"features", severity_features()}}), "application/json");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->body, dispatch(snap(), "POST", "/predict/severity", to_body({{"features", severity_features()}})).body);
  const auto o = client.Options("/predict/aqi");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->status, 204);
  const auto nf = client.Get("/nope");
  ASSERT_TRUE(nf);
  EXPECT_EQ(nf->status, 404);
  EXPECT_EQ(Json::parse(nf->body)["code"], "not_found");
  state.reload();
  EXPECT_EQ(client.Get("/health")->status, 200);
  server.stop();
  th.join();
}

TEST(ServiceBoot, MissingModelDirFailsStartup) {
  EXPECT_THROW(load_snapshot("/definitely/not/here", aqi::default_breakpoint_path()), IoError);
  TempDir empty;
  EXPECT_THROW(load_snapshot(empty.path(), aqi::default_breakpoint_path()), IoError);
}

TEST(Base64, StrictDecoding) {
  const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 251};
  EXPECT_EQ(decode_base64(encode_base64(bytes)), bytes);
  EXPECT_EQ(decode_base64("TWE="), (std::vector<std::uint8_t>{'M', 'a'}));
  EXPECT_FALSE(decode_base64("TWE"));
  EXPECT_FALSE(decode_base64("T=WE"));
  EXPECT_FALSE(decode_base64("TW E"));
  EXPECT_FALSE(decode_base64(""));
}

TEST(JsonOut, SeventeenSignificantDigits) {
  EXPECT_EQ(to_body({{"x", 0.1}, {"n", 3}}), "{\"x\":0.10000000000000001,\"n\":3}\n");
}

}  // namespace
}  // namespace aqilung::service
