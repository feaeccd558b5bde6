// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/pipeline.hpp"
#include "nlsdecay/report.hpp"

using namespace nlsdecay;

namespace {

RunConfig small_config() {
  RunConfig cfg;
  cfg.points = 256;
  cfg.canonical = true;
  return cfg;
}

void expect_invalid(RunConfig cfg, const std::string& fragment) {
  try {
    cfg.validate();
    FAIL() << "expected rejection containing '" << fragment << "'";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

struct PipelineRun {
  ProfileStage profile;
  SpectrumStage spectrum;
  DecayStage decay;
  Json report;
};

PipelineRun run_all(const RunConfig& cfg) {
  ProfileStage profile = run_profile(cfg);
  const BlockOperator op = build_operator(cfg, profile);
  SpectrumStage spectrum = run_spectrum(cfg, profile, op);
  DecayStage decay = run_decay(cfg, profile, spectrum);
  ReportParts parts{&profile, &spectrum, &decay, {}, {{"spectrum", 1.5}}};
  for (auto& c : profile_checks(profile)) parts.checks.push_back(c);
  for (auto& c : spectrum_checks(cfg, spectrum)) parts.checks.push_back(c);
  for (auto& c : decay_checks(decay)) parts.checks.push_back(c);
  Json report = make_report(cfg, parts);
  return {std::move(profile), std::move(spectrum), std::move(decay), std::move(report)};
}

const PipelineRun& cubic_run() {
  static const PipelineRun run = run_all(small_config());
  return run;
}

}  // namespace

TEST(RunConfig, DefaultsAreValid) {
  const RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.window_lo(), 8.0);
  EXPECT_DOUBLE_EQ(cfg.window_hi(), 17.0);
  EXPECT_EQ(cfg.grid().points(), 1024);
}

TEST(RunConfig, RejectsInconsistentFields) {
  RunConfig c;
  c.sigma = 0.0;
  expect_invalid(c, "sigma");
  c = RunConfig{};
  c.mu = -1.0;
  expect_invalid(c, "mu");
  c = RunConfig{};
  c.strip_margin = 1.0;
  expect_invalid(c, "degenerate strip");
  c = RunConfig{};
  c.rate_tolerance = -0.1;
  expect_invalid(c, "rate");
  c = RunConfig{};
  c.order = 3;
  expect_invalid(c, "order");
  c = RunConfig{};
  c.delta_fractions = {0.6};
  expect_invalid(c, "delta");
  c = RunConfig{};
  c.epsilons = {-1.0};
  expect_invalid(c, "eps");
  c = RunConfig{};
  c.fit_hi = 19.0;
  expect_invalid(c, "boundary zone");
  c = RunConfig{};
  c.potentials_off = true;
  c.potentials_file = "p.csv";
  expect_invalid(c, "potentials");
  c = RunConfig{};
  c.points = 4;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Pipeline, FreeOperatorHasEmptyGap) {
  RunConfig cfg = small_config();
  cfg.potentials_off = true;
  const PipelineRun r = run_all(cfg);
  EXPECT_EQ(r.profile.source, "off");
  EXPECT_FALSE(r.profile.profile.has_value());
  EXPECT_TRUE(r.spectrum.set.points.empty());
  EXPECT_TRUE(r.decay.points.empty());
  EXPECT_TRUE(r.report["spectrum"]["points"].empty());
}

TEST(Pipeline, CubicRunPassesItsChecks) {
  const PipelineRun& r = cubic_run();
  EXPECT_EQ(r.profile.source, "soliton");
  EXPECT_EQ(r.spectrum.set.total_multiplicity(), 4);
  ASSERT_EQ(r.spectrum.entries.size(), 1u);
  ASSERT_TRUE(r.spectrum.entries[0].jordan.has_value());
  EXPECT_EQ(r.spectrum.entries[0].jordan->algebraic, 4);
  EXPECT_TRUE(r.spectrum.lminus_positive);
  ASSERT_EQ(r.decay.points.size(), 1u);
  EXPECT_LT(r.decay.points[0].identity_residual, kIdentityTolerance);
  for (const Json& c : r.report["checks"]) EXPECT_NE(c["status"], "fail") << c.dump();
}

TEST(Report, KeysInFixedOrder) {
  const Json& j = cubic_run().report;
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected{"schema_version", "config", "profile", "spectrum",
                                          "symmetry",       "decay",  "checks",  "timing"};
  EXPECT_EQ(keys, expected);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_TRUE(j["timing"].empty());
}

TEST(Report, ConfigEcho) {
  RunConfig cfg = small_config();
  cfg.fit_lo = 7.5;
  const Json j = config_json(cfg);
  EXPECT_EQ(j["points"], 256);
  EXPECT_EQ(j["fit_lo"], 7.5);
  EXPECT_TRUE(j["fit_hi"].is_null());
  EXPECT_EQ(j["eps_list"].size(), 5u);
}

TEST(Report, TimingKeptOutsideCanonicalMode) {
  RunConfig cfg = small_config();
  cfg.canonical = false;
  cfg.potentials_off = true;
  const Json j = make_report(cfg, ReportParts{nullptr, nullptr, nullptr, {}, {{"profile", 0.25}}});
  EXPECT_EQ(j["timing"]["profile"], 0.25);
  EXPECT_TRUE(j["spectrum"].is_null());
}

TEST(Report, DeterministicAcrossRuns) {
  const PipelineRun again = run_all(small_config());
  EXPECT_EQ(again.report.dump(), cubic_run().report.dump());
}

TEST(Report, CsvRendering) {
  const auto dir = std::filesystem::temp_directory_path() / "nlsdecay_test_pipeline_csv";
  std::filesystem::remove_all(dir);
  const auto written = write_report_csvs(cubic_run().report, dir);
  EXPECT_EQ(written.size(), 4u);
  std::ifstream spectrum(dir / "spectrum.csv");
  std::string header;
  std::getline(spectrum, header);
  EXPECT_EQ(header, "index,re,im,multiplicity,algebraic,geometric,jordan_index,residual");
  std::ifstream checks(dir / "checks.csv");
  std::getline(checks, header);
  EXPECT_EQ(header.rfind("name,status", 0), 0u);
  std::filesystem::remove_all(dir);

  Json bad = cubic_run().report;
  bad["schema_version"] = 99;
  EXPECT_THROW(write_report_csvs(bad, dir), ValidationError);
  EXPECT_THROW(write_report_csvs(Json::array(), dir), ValidationError);
}

TEST(Report, TailsCsv) {
  std::stringstream out;
  write_tails_csv(out, cubic_run().spectrum);
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "point,chain,position,x,abs_x,log_amplitude");
  std::string row;
  EXPECT_TRUE(static_cast<bool>(std::getline(out, row)));
}
