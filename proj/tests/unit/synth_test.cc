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

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "gtest/gtest.h"
#include "restoreval/catalog.h"
#include "restoreval/error.h"
#include "restoreval/frechet.h"
#include "restoreval/series_io.h"
#include "restoreval/series_metrics.h"
#include "restoreval/study_plan.h"
#include "restoreval/synth.h"
#include "test_util.h"

namespace restoreval {
namespace {

using ::restoreval::testing::ErrorCodeOf;
using ::restoreval::testing::ScopedTempDir;

TimeSeries ConstantTrace(std::int64_t frames, double brow, double smile,
                         double blink) {
  std::vector<double> v;
  for (std::int64_t t = 0; t < frames; ++t) {
    v.insert(v.end(), {brow, smile, blink});
  }
  return TimeSeries(30.0, {"brow", "smile", "blink"}, v);
}

TEST(GaussianSpecTest, AnalyticFrechetClosedForms) {
  const auto zero = GaussianSpec::Isotropic(Eigen::VectorXd::Zero(3), 1.0, 0);
  EXPECT_EQ(AnalyticFrechet(zero, zero), 0.0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1(0) = 1.0;
  EXPECT_DOUBLE_EQ(
      AnalyticFrechet(zero, GaussianSpec::Isotropic(e1, 1.0, 0)), 1.0);
  const auto four = GaussianSpec::Diagonal(Eigen::VectorXd::Zero(3),
                                           Eigen::Vector3d(4, 4, 4), 0);
  EXPECT_DOUBLE_EQ(AnalyticFrechet(four, zero), 3.0);
  const auto full = GaussianSpec::Full(Eigen::VectorXd::Zero(3),
                                       Eigen::MatrixXd::Identity(3, 3), 0);
  EXPECT_EQ(ErrorCodeOf([&] { AnalyticFrechet(full, zero); }),
            ErrorCode::kUnsupportedForm);
}

TEST(GaussianSpecTest, SamplingIsDeterministic) {
  const auto spec = GaussianSpec::Diagonal(Eigen::VectorXd::Ones(4),
                                           Eigen::Vector4d(1, 2, 3, 4), 42);
  EXPECT_EQ(SampleGaussianFeatures(spec, 50), SampleGaussianFeatures(spec, 50));
  auto other = spec;
  other.seed = 43;
  EXPECT_FALSE(SampleGaussianFeatures(spec, 50) ==
               SampleGaussianFeatures(other, 50));
}

TEST(GaussianSpecTest, ZeroVarianceRowsEqualMean) {
  const auto spec = GaussianSpec::Diagonal(Eigen::Vector3d(0.5, -1, 2),
                                           Eigen::Vector3d::Zero(), 1);
  const FeatureMatrix f = SampleGaussianFeatures(spec, 10);
  for (std::int64_t r = 0; r < 10; ++r) {
    EXPECT_EQ(f.at(r, 0), 0.5f);
    EXPECT_EQ(f.at(r, 1), -1.0f);
    EXPECT_EQ(f.at(r, 2), 2.0f);
  }
}

TEST(GaussianSpecTest, SampleMeanWithinFourSigmaOverRootN) {
  const double sigma = 1.5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto spec = GaussianSpec::Isotropic(
        Eigen::VectorXd::LinSpaced(8, -1, 1), sigma * sigma, seed);
    const FeatureMatrix f = SampleGaussianFeatures(spec, 4096);
    const GaussianSummary g = EstimateGaussian(f);
    for (int i = 0; i < 8; ++i) {
      EXPECT_LE(std::abs(g.mean(i) - spec.mean(i)), 4 * sigma / 64.0);
    }
  }
}

TEST(GaussianSpecTest, FullCovarianceIsReproducedBySamples) {
  Eigen::Matrix3d cov;
  cov << 2.0, 0.8, 0.0, 0.8, 1.0, 0.3, 0.0, 0.3, 0.5;
  const auto spec = GaussianSpec::Full(Eigen::Vector3d(1, 2, 3), cov, 9);
  const GaussianSummary g = EstimateGaussian(SampleGaussianFeatures(spec, 20000));
  EXPECT_LT((g.cov - cov).cwiseAbs().maxCoeff(), 0.08);
}

TEST(ShiftedSeriesTest, ZeroShiftWithoutNoiseIsIdentity) {
  const TimeSeries base(30.0, {"x"}, RandomWalkSignal(100, 1.0, 0.0, 2));
  const ShiftedSeries s = MakeShiftedSeries(base, 0, 0.0, 1);
  EXPECT_EQ(s.true_shift, 0);
  EXPECT_EQ(s.series.Channel(0), base.Channel(0));
}

TEST(ShiftedSeriesTest, NoisyShiftIsRecoveredWithinOneFrame) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto signal = RandomWalkSignal(1200, 1.0, 0.5, seed);
    const TimeSeries base(30.0, {"x"}, signal);
    const ShiftedSeries s = MakeShiftedSeries(base, 90, 0.01, seed + 1000);
    const ShiftedMapeResult r =
        MapeBestShift(signal, s.series.Channel(0), 20.0, 30.0);
    EXPECT_LE(std::abs(r.best_shift_frames - 90), 1) << "seed " << seed;
  }
}

TEST(RandomWalkSignalTest, SpansRequestedAmplitude) {
  const auto s = RandomWalkSignal(500, 2.0, -1.0, 4);
  EXPECT_DOUBLE_EQ(*std::min_element(s.begin(), s.end()), -1.0);
  EXPECT_DOUBLE_EQ(*std::max_element(s.begin(), s.end()), 1.0);
  EXPECT_EQ(RandomWalkSignal(500, 2.0, -1.0, 4), s);
}

TEST(FaceTest, ZeroTraceGivesIdenticalNeutralFrames) {
  const FaceSequence seq = SynthFaceSequence(5, ConstantTrace(6, 0, 0, 0), 6);
  ASSERT_EQ(seq.frames.size(), 6u);
  for (const GrayImage& f : seq.frames) {
    EXPECT_EQ(f.pixels, seq.frames.front().pixels);
  }
  EXPECT_EQ(seq.trace.Channel(0), ConstantTrace(6, 0, 0, 0).Channel(0));
}

TEST(FaceTest, SameSeedSamePixels) {
  const TimeSeries trace =
      TaskExpressionTrace(Task::kEmotion, 3, 4, 20, 30.0);
  EXPECT_EQ(SynthFaceSequence(3, trace, 20).frames[7].pixels,
            SynthFaceSequence(3, trace, 20).frames[7].pixels);
  EXPECT_NE(SynthFaceSequence(3, trace, 20).frames[0].pixels,
            SynthFaceSequence(8, trace, 20).frames[0].pixels);
  EXPECT_EQ(ErrorCodeOf([&] { SynthFaceSequence(3, trace, 19); }),
            ErrorCode::kInvalidArgument);
}

TEST(FaceTest, BrowRampMovesCentroidMonotonicallyUp) {
  std::vector<double> v;
  const int frames = 21;
  for (int t = 0; t < frames; ++t) {
    v.insert(v.end(), {t / double(frames - 1), 0.0, 0.0});
  }
  const TimeSeries ramp(30.0, {"brow", "smile", "blink"}, v);
  const FaceSequence seq = SynthFaceSequence(11, ramp, frames);
  double previous = BrowCentroidY(seq.frames[0]);
  for (int t = 1; t < frames; ++t) {
    const double y = BrowCentroidY(seq.frames[t]);
    EXPECT_LT(y, previous) << "frame " << t;
    previous = y;
  }
}

TEST(FaceTest, MeasurementsTrackTheTrace) {
  const FaceGeometry g = FaceGeometry::Canonical();
  for (double level : {0.0, 0.3, 0.7, 1.0}) {
    EXPECT_NEAR(MeasureFace(RenderFace(g, level, 0, 0)).brow, level, 0.05);
    EXPECT_NEAR(MeasureFace(RenderFace(g, 0, level, 0)).smile, level, 0.05);
    EXPECT_NEAR(MeasureFace(RenderFace(g, 0, 0, level)).blink, level, 0.15);
  }
}

TEST(OcclusionTest, EmptyTemplateLeavesFramesUnchanged) {
  const FaceSequence seq = SynthFaceSequence(1, ConstantTrace(3, 0.5, 0, 0), 3);
  const auto out = ApplyOcclusionTemplate(seq.frames, {});
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].pixels, seq.frames[i].pixels);
  }
}

TEST(OcclusionTest, SinglePatchChangesSamePixelsEveryFrame) {
  OcclusionTemplate one;
  one.patches.push_back({0.5, 0.5, 0.1, 0.9f});
  const TimeSeries trace = TaskExpressionTrace(Task::kSchaede, 1, 2, 8, 30.0);
  const FaceSequence seq = SynthFaceSequence(1, trace, 8);
  const auto out = ApplyOcclusionTemplate(seq.frames, one);
  const auto mask = OcclusionMask(one, 64, 64);
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) {
        EXPECT_EQ(out[f].pixels[i], 0.9f);
      } else {
        EXPECT_EQ(out[f].pixels[i], seq.frames[f].pixels[i]);
      }
    }
  }
}

TEST(OcclusionTest, CanonicalTemplateCoversAboutHalfTheFace) {
  const OcclusionTemplate tpl = CanonicalSensorTemplate();
  EXPECT_EQ(tpl.patches.size(), 62u);
  for (const auto& p : tpl.patches) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 1.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 1.0);
  }
  for (const auto& c : tpl.cables) {
    for (const auto& [x, y] : c.points) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      EXPECT_GE(y, 0.0);
      EXPECT_LE(y, 1.0);
    }
  }
  for (std::uint64_t seed : {0ull, 1ull, 2ull, 77ull}) {
    const double coverage =
        FaceCoverage(tpl, FaceGeometry::ForSubject(seed), 64);
    EXPECT_GE(coverage, 0.30);
    EXPECT_LE(coverage, 0.60);
  }
}

TEST(ToyFeaturesTest, ShapesAndDeterminism) {
  const GrayImage frame = RenderFace(FaceGeometry::Canonical(), 0.2, 0.4, 0);
  const auto e = ToyEmbedding(frame);
  EXPECT_EQ(e.size(), static_cast<std::size_t>(kToyEmbeddingDim));
  EXPECT_EQ(e, ToyEmbedding(frame));
  const FeatureStack s = ToyFeatureStack(frame, 3);
  EXPECT_EQ(s.frame_index, 3);
  ASSERT_EQ(s.layers.size(), 2u);
  EXPECT_EQ(s.layers[0].id, "l1");
  EXPECT_EQ(s.layers[0].height, 8);
  EXPECT_EQ(s.layers[1].width, 4);
  ValidateStack(s);
}

TEST(ToySeriesTest, ChannelSets) {
  const FaceSequence seq = SynthFaceSequence(1, ConstantTrace(4, 0, 1, 0), 4);
  const TimeSeries au = ToyAuSeries(seq.frames, 30.0);
  EXPECT_EQ(au.channels(), 20);
  EXPECT_EQ(au.channel_names().back(), "AU43");
  const TimeSeries emo = ToyEmotionSeries(seq.frames, 30.0);
  EXPECT_EQ(emo.channel_names(), EmotionChannels());
  for (std::int64_t t = 0; t < emo.frames(); ++t) {
    double total = 0.0;
    for (std::int64_t c = 0; c < emo.channels(); ++c) total += emo.at(t, c);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  // A full smile makes happiness the dominant emotion.
  const auto happy = *emo.ChannelIndex("happiness");
  for (std::int64_t c = 0; c < emo.channels(); ++c) {
    EXPECT_LE(emo.at(0, c), emo.at(0, happy));
  }
}

TEST(SynthBundleTest, ManifestValidatesAndFeedsThePlan) {
  ScopedTempDir dir;
  SynthBundleOptions options;
  options.subjects = 3;
  options.frames = 12;
  options.size = 32;
  options.write_frames = true;
  const SynthBundle bundle = WriteSynthBundle(dir.path(), options);
  EXPECT_EQ(bundle.recordings, 3 * 2 * 3 * 5);
  const RecordingCatalog catalog = LoadManifest(bundle.manifest);
  EXPECT_EQ(catalog.Subjects(),
            (std::vector<std::string>{"s01", "s02", "s03"}));
  const auto jobs = BuildPairings(catalog);
  for (Task task : kAllTasks) {
    EXPECT_EQ(std::count_if(jobs.begin(), jobs.end(),
                            [&](const auto& j) { return j.task() == task; }),
              27);
  }
  const RecordingRef& first = catalog.entries().front();
  const TimeSeries au = ReadSeriesCsv(first.artifacts.at("au"));
  EXPECT_EQ(au.frames(), 12);
  EXPECT_DOUBLE_EQ(au.fps(), 30.0);
  EXPECT_TRUE(first.artifacts.contains("frames"));
}

TEST(SynthBundleTest, ReproducibleBytes) {
  ScopedTempDir a, b;
  SynthBundleOptions options;
  options.subjects = 1;
  options.frames = 6;
  options.size = 16;
  WriteSynthBundle(a.path(), options);
  WriteSynthBundle(b.path(), options);
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(b.path() / rel, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)), {});
    const std::string cb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(ca, cb) << rel;
  }
}

}  // namespace
}  // namespace restoreval
