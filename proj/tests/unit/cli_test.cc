// Copyright 2026 The restoreval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "restoreval/atomic_file.h"
#include "restoreval/cli.h"
#include "restoreval/frechet.h"
#include "restoreval/series_io.h"
#include "restoreval/synth.h"
#include "restoreval/tensor_io.h"
#include "test_util.h"

namespace restoreval::cli {
namespace {

using ::restoreval::testing::ScopedTempDir;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCommand(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(CliTest, FidOfFileWithItselfPrintsZero) {
  ScopedTempDir dir;
  const auto spec =
      GaussianSpec::Isotropic(Eigen::VectorXd::Zero(16), 1.0, 3);
  const std::string x = (dir.path() / "x.ffr").string();
  WriteFeatureMatrix(SampleGaussianFeatures(spec, 200), x);
  const Invocation r = Invoke({"fid", "--a", x, "--b", x, "--seed", "7"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "0.0\n");
}

TEST(CliTest, FidPrintsLibraryValue) {
  ScopedTempDir dir;
  const auto a = SampleGaussianFeatures(
      GaussianSpec::Isotropic(Eigen::VectorXd::Zero(8), 1.0, 1), 150);
  const auto b = SampleGaussianFeatures(
      GaussianSpec::Isotropic(Eigen::VectorXd::Ones(8), 2.0, 2), 150);
  WriteFeatureMatrix(a, dir.path() / "a.ffr");
  WriteFeatureMatrix(b, dir.path() / "b.ffr");
  BatchPolicy policy;
  policy.seed = 11;
  policy.batch = 64;
  const Invocation r = Invoke({"fid", "--a", (dir.path() / "a.ffr").string(), "--b",
                        (dir.path() / "b.ffr").string(), "--seed", "11",
                        "--fid-batch", "64"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, FormatNumber(FidBetweenSets(a, b, policy).distance) + "\n");
}

TEST(CliTest, UsageErrorsExitTwoWithSynopsis) {
  const Invocation unknown = Invoke({"fid", "--a", "x", "--b", "y", "--bogus"});
  EXPECT_EQ(unknown.code, kExitUsage);
  EXPECT_NE(unknown.err.find("usage: restoreval"), std::string::npos);
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"plan"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"report", "--manifest", "m", "--take-policy", "x"}).code,
            kExitUsage);
}

TEST(CliTest, HelpExitsZero) {
  const Invocation r = Invoke({"synth", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--subjects"), std::string::npos);
}

TEST(CliTest, MetricFailureExitsOne) {
  ScopedTempDir dir;
  const Invocation r = Invoke({"fid", "--a", (dir.path() / "missing.ffr").string(),
                        "--b", (dir.path() / "missing.ffr").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("IoFailure"), std::string::npos);
}

TEST(CliTest, ValidateReportsViolations) {
  ScopedTempDir dir;
  std::ofstream(dir.path() / "m.jsonl")
      << R"({"subject":"a","session":"S3","condition":"normal","task":"schaede","take":1,"kind":"au","path":"x.csv"})"
      << "\n";
  const Invocation r = Invoke({"validate", "--manifest",
                        (dir.path() / "m.jsonl").string()});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.out.find("invalid"), std::string::npos);
}

TEST(CliTest, SeriesCommandsScoreChannels) {
  ScopedTempDir dir;
  const TimeSeries a(30.0, {"AU01", "AU43"}, {0.1, 0.0, 0.2, 1.0, 0.3, 0.0});
  const TimeSeries b(30.0, {"AU01", "AU43"}, {0.1, 0.0, 0.2, 0.0, 0.4, 1.0});
  WriteSeriesCsv(a, dir.path() / "a.csv");
  WriteSeriesCsv(b, dir.path() / "b.csv");
  const std::string pa = (dir.path() / "a.csv").string();
  const std::string pb = (dir.path() / "b.csv").string();
  const Invocation dtw = Invoke({"dtw", "--a", pa, "--b", pb});
  EXPECT_EQ(dtw.code, kExitOk) << dtw.err;
  EXPECT_EQ(dtw.out, "AU01\t0.0333333\nmean\t0.0333333\n");
  const Invocation raw = Invoke({"dtw", "--a", pa, "--b", pb, "--channel", "AU43",
                          "--dtw-norm", "raw"});
  EXPECT_EQ(raw.out, "1.0\n");
  const Invocation mape = Invoke({"mape", "--a", pa, "--b", pb, "--channel", "AU01",
                           "--shift-window", "0.05"});
  EXPECT_EQ(mape.code, kExitOk) << mape.err;
  EXPECT_EQ(mape.out.substr(0, mape.out.find('\t')), "0.111111");
}

TEST(CliTest, ConfigFileIsOverriddenByFlags) {
  RunConfig config;
  ApplyConfigJson(R"({"seed": 9, "fid_batch": 64, "exclude_channels": [],
                      "take_policy": "first", "lpips_pairing": "all-pairs"})",
                  config);
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.fid_batch, 64);
  EXPECT_TRUE(config.exclude_channels.empty());
  EXPECT_EQ(config.take_policy, TakePolicy::kFirst);
  EXPECT_EQ(config.lpips_pairing, FramePairing::kAllPairs);
  EXPECT_THROW(ApplyConfigJson(R"({"sed": 1})", config), Error);

  ScopedTempDir dir;
  const auto spec =
      GaussianSpec::Isotropic(Eigen::VectorXd::Zero(4), 1.0, 3);
  WriteFeatureMatrix(SampleGaussianFeatures(spec, 40), dir.path() / "a.ffr");
  WriteFeatureMatrix(SampleGaussianFeatures(
                         GaussianSpec::Isotropic(Eigen::VectorXd::Ones(4), 1.0,
                                                 4),
                         40),
                     dir.path() / "b.ffr");
  WriteFileAtomically(dir.path() / "c.json", R"({"fid_batch": 1})");
  const std::vector<std::string> base = {
      "fid", "--a", (dir.path() / "a.ffr").string(), "--b",
      (dir.path() / "b.ffr").string(), "--config",
      (dir.path() / "c.json").string()};
  EXPECT_EQ(Invoke(base).code, kExitUsage);
  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--fid-batch", "16"});
  EXPECT_EQ(Invoke(with_flag).code, kExitOk);
}

TEST(CliTest, DefaultsMatchProtocol) {
  const RunConfig config;
  EXPECT_EQ(config.fid_batch, 128);
  EXPECT_EQ(config.shift_window_seconds, 20.0);
  EXPECT_EQ(config.fps, 30.0);
  EXPECT_EQ(config.exclude_channels, std::set<std::string>{"AU43"});
  EXPECT_EQ(config.take_policy, TakePolicy::kAverage);
  EXPECT_EQ(config.dtw_normalization, DtwNormalization::kPathLength);
  EXPECT_EQ(config.lpips_pairing, FramePairing::kIndexAligned);
}

TEST(CliTest, SynthThenReportProducesTablesAndEchoesConfig) {
  ScopedTempDir dir;
  const std::string out = (dir.path() / "out").string();
  const Invocation synth = Invoke({"synth", "--subjects", "2", "--frames", "12",
                            "--size", "32", "--takes", "1", "--out", out});
  ASSERT_EQ(synth.code, kExitOk) << synth.err;
  const std::string manifest = out + "/manifest.jsonl";
  EXPECT_EQ(Invoke({"validate", "--manifest", manifest}).code, kExitOk);

  const Invocation report = Invoke({"report", "--manifest", manifest, "--seed", "5"});
  ASSERT_EQ(report.code, kExitOk) << report.err;
  const std::string md = ReadFileToString(out + "/report.md");
  const std::string csv = ReadFileToString(out + "/report.csv");
  EXPECT_NE(md.find("- seed: `5`"), std::string::npos);
  EXPECT_NE(csv.find("# seed=5"), std::string::npos);
  EXPECT_NE(md.find("## Perceptual metrics"), std::string::npos);
  EXPECT_NE(md.find("## Action units"), std::string::npos);
  EXPECT_NE(md.find("## Emotions"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(out + "/scores.jsonl"));

  // Rerunning from the saved scores reproduces the same report.
  const Invocation again = Invoke({"report", "--manifest", manifest, "--seed", "5",
                            "--scores", out + "/scores.jsonl"});
  EXPECT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(ReadFileToString(out + "/report.md"), md);
}

}  // namespace
}  // namespace restoreval::cli
