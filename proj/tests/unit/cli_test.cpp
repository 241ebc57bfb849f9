// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "aqilung/cli/app.hpp"
#include "support/tempdir.hpp"

namespace aqilung::cli {
namespace {

using testing_support::TempDir;

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aqilung");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kTiny = std::string(AQILUNG_FIXTURE_DIR) + "/tiny.toml";

TEST(Cli, SubcommandHelpExitsZero) {
  const auto r = run_cli({"evaluate", "--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("Usage: aqilung evaluate"), std::string::npos);
}

TEST(Cli, UnknownSubcommandPrintsUsageAndFails) {
  const auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.status, kExitUsage);
  EXPECT_NE(r.err.find("Subcommands:"), std::string::npos);
  EXPECT_NE(r.err.find("aqilung: error code=usage exit=2 message=\"unknown subcommand 'frobnicate'\""), std::string::npos);
}

TEST(Cli, UnknownFlagRejected) {
  const auto r = run_cli({"evaluate", "--frob"});
  EXPECT_EQ(r.status, kExitUsage);
  EXPECT_NE(r.err.find("Usage:"), std::string::npos);
}

TEST(Cli, ConfigErrorsCarryLineNumbers) {
  TempDir dir;
  testing_support::write_text(dir / "bad.toml", "seed = 1\n\n[severity]\nk = \"five\"\n");
  const auto r = run_cli({"--config", (dir / "bad.toml").string(), "ingest"});
  EXPECT_EQ(r.status, kExitUsage);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(Cli, ErrorLineIsSingleMachineParsableLine) {
  const auto r = run_cli({"ingest", "--set", "data.patient_csv=/no/such.csv"});
  EXPECT_EQ(r.status, kExitIo);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(r.err.rfind("aqilung: error code=io exit=5 message=", 0), 0u) << r.err;
}

TEST(Cli, ValidationErrorsExitThree) {
  TempDir dir;
  testing_support::write_text(dir / "p.csv", "Age,Gender\n40,1\n");
  const auto r = run_cli({"ingest", "--set", "data.patient_csv=" + (dir / "p.csv").string()});
  EXPECT_EQ(r.status, kExitValidation) << r.err;
}

TEST(Cli, TrainSeverityWritesArtifactsAndReport) {
  TempDir dir;
  const auto models = dir / "models", reports = dir / "reports";
  const auto r = run_cli({"train-severity", "--config", kTiny, "--set", "output.models_dir=" + models.string(),
                          "output.reports_dir=" + reports.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const auto* kind : {"knn", "svc"}) {
    EXPECT_TRUE(std::filesystem::exists(models / kind / "manifest.json"));
    EXPECT_TRUE(std::filesystem::exists(models / kind / "weights.bin"));
  }
  const auto text = slurp(reports / "severity_report.txt");
  EXPECT_EQ(r.out.substr(0, text.size()), text);
  const auto golden = slurp(std::filesystem::path(AQILUNG_GOLDEN_DIR) / "severity_report_tiny.txt");
  EXPECT_EQ(text, golden);
  const auto j = Json::parse(slurp(reports / "severity_report.json"));
  EXPECT_EQ(j["models"].size(), 2u);
  EXPECT_EQ(j["train_rows"], 140);

  // Rerun with the same seed: identical report, artifacts replaced in place.
  const auto again = run_cli({"train-severity", "--config", kTiny, "--set", "output.models_dir=" + models.string(),
                              "output.reports_dir=" + reports.string()});
  ASSERT_EQ(again.status, 0);
  EXPECT_EQ(slurp(reports / "severity_report.txt"), text);
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(models), {}), 2);

  const auto ev = run_cli({"evaluate", "--config", kTiny, "--set", "output.models_dir=" + models.string(),
                           "output.reports_dir=" + reports.string()});
  ASSERT_EQ(ev.status, 0) << ev.err;
  EXPECT_EQ(ev.out, text);

  const auto pr = run_cli({"predict", "--config", kTiny, "--set", "output.models_dir=" + models.string(), "--model",
                           "svc", "--aqi", "500", "--features",
                           "Age=44,Gender=1,Alcohol use=4,Dust Allergy=5,Occupational Hazards=5,Genetic Risk=4,"
                           "Smoking=5,Passive Smoker=5,Obesity=4,Balanced Diet=4"});
  ASSERT_EQ(pr.status, 0) << pr.err;
  const auto body = Json::parse(pr.out);
  EXPECT_EQ(body["model_used"], "svc");
  EXPECT_EQ(body["exposure_level"], 8);
}

TEST(Cli, SeedFlagOverridesConfig) {
  TempDir dir;
  auto train = [&](const std::string& seed) {
    const auto r = run_cli({"train-severity", "--config", kTiny, "--seed", seed, "--set",
                            "output.models_dir=" + (dir / ("m" + seed)).string(),
                            "output.reports_dir=" + (dir / ("r" + seed)).string()});
    EXPECT_EQ(r.status, 0) << r.err;
    return Json::parse(slurp(dir / ("m" + seed) / "knn" / "manifest.json"))["seed"].get<int>();
  };
  EXPECT_EQ(train("11"), 11);
}

TEST(Cli, ResampleHitsConfiguredTotal) {
  TempDir dir;
  const auto r = run_cli({"resample", "--config", kTiny, "-o", (dir / "out.csv").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto csv = slurp(dir / "out.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 141);
}

TEST(Cli, EvaluateWithNoModelsSaysSo) {
  TempDir dir;
  const auto r = run_cli({"evaluate", "--set", "output.models_dir=" + (dir / "none").string(),
                          "output.reports_dir=" + (dir / "r").string()});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "no models to report\n");
  EXPECT_EQ(slurp(dir / "r" / "evaluation_report.txt"), "no models to report\n");
}

TEST(Cli, PredictReadingsNeedsNoTraining) {
  TempDir dir;
  // A model directory must still exist for the snapshot; reuse a trained one.
  ASSERT_EQ(run_cli({"train-severity", "--config", kTiny, "--set", "output.models_dir=" + (dir / "m").string(),
                     "output.reports_dir=" + (dir / "r").string()})
                .status,
            0);
  const auto r = run_cli({"predict", "--set", "output.models_dir=" + (dir / "m").string(), "--readings", "PM2.5=35.4"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["aqi"], 100);
  const auto both = run_cli({"predict", "--readings", "CO=1", "--image", "x.png"});
  EXPECT_EQ(both.status, kExitUsage);
}

TEST(Report, RendersTableStyle) {
  EvalSummary s{{{"KNN", 0.9843, 0.95}, {"SVC", 0.796, 0.8}}, RegressionScore{12.3456, 0.987}};
  EXPECT_EQ(render_report(s),
            "Model  Train accuracy  Test accuracy\n"
            "KNN    98.4%           95.0%\n"
            "SVC    79.6%           80.0%\n"
            "MSE: 12.35\n"
            "R2: 0.99\n");
  EXPECT_EQ(render_report({}), "no models to report\n");
}

}  // namespace
}  // namespace aqilung::cli
