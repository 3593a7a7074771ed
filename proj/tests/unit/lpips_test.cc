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
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "restoreval/error.h"
#include "restoreval/lpips.h"
#include "restoreval/tensor_io.h"
#include "test_util.h"

namespace restoreval {
namespace {

using ::restoreval::testing::ErrorCodeOf;
using ::restoreval::testing::ScopedTempDir;

FeatureStack RandomStack(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  FeatureStack s;
  s.layers.push_back({"conv1", 4, 3, 3, {}});
  s.layers.push_back({"conv2", 6, 2, 1, {}});
  for (FeatureLayer& layer : s.layers) {
    layer.values.resize(layer.channels * layer.locations());
    for (float& v : layer.values) v = normal(rng);
  }
  return s;
}

// Direct transcription of the distance: per-location unit normalization,
// weighted squared difference summed over channels, averaged over locations,
// summed over layers.
double OracleLpips(const FeatureStack& a, const FeatureStack& b,
                   const LayerWeights& weights) {
  double total = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const FeatureLayer& x = a.layers[l];
    const FeatureLayer& y = b.layers[l];
    double layer_sum = 0.0;
    for (std::int64_t h = 0; h < x.height; ++h) {
      for (std::int64_t w = 0; w < x.width; ++w) {
        double nx = 0.0, ny = 0.0;
        for (std::int64_t c = 0; c < x.channels; ++c) {
          nx += double(x.at(c, h, w)) * x.at(c, h, w);
          ny += double(y.at(c, h, w)) * y.at(c, h, w);
        }
        nx = std::sqrt(nx);
        ny = std::sqrt(ny);
        for (std::int64_t c = 0; c < x.channels; ++c) {
          const double xa = nx < 1e-10 ? 0.0 : x.at(c, h, w) / nx;
          const double ya = ny < 1e-10 ? 0.0 : y.at(c, h, w) / ny;
          const double wc = weights.empty() ? 1.0 : weights.at(x.id)[c];
          layer_sum += wc * (xa - ya) * (xa - ya);
        }
      }
    }
    total += layer_sum / static_cast<double>(x.locations());
  }
  return total;
}

TEST(NormalizeStackTest, UnitNormsPerLocation) {
  FeatureStack s;
  s.layers.push_back({"l", 2, 1, 2, {3.0f, 0.0f, 4.0f, 0.0f}});
  const FeatureStack n = NormalizeStack(s);
  EXPECT_FLOAT_EQ(n.layers[0].at(0, 0, 0), 0.6f);
  EXPECT_FLOAT_EQ(n.layers[0].at(1, 0, 0), 0.8f);
  EXPECT_EQ(n.layers[0].at(0, 0, 1), 0.0f);
  EXPECT_EQ(n.layers[0].at(1, 0, 1), 0.0f);
}

TEST(NormalizeStackTest, IsIdempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureStack once = NormalizeStack(RandomStack(seed));
    const FeatureStack twice = NormalizeStack(once);
    for (std::size_t l = 0; l < once.layers.size(); ++l) {
      for (std::size_t i = 0; i < once.layers[l].values.size(); ++i) {
        EXPECT_NEAR(twice.layers[l].values[i], once.layers[l].values[i], 1e-6);
      }
    }
  }
}

TEST(LpipsFrameTest, OrthogonalBasisVectorsGiveTwo) {
  FeatureStack a, b;
  a.layers.push_back({"l", 2, 1, 1, {1.0f, 0.0f}});
  b.layers.push_back({"l", 2, 1, 1, {0.0f, 1.0f}});
  EXPECT_DOUBLE_EQ(LpipsFrame(a, b), 2.0);
}

TEST(LpipsFrameTest, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FeatureStack a = RandomStack(seed);
    const FeatureStack b = RandomStack(seed + 1000);
    EXPECT_NEAR(LpipsFrame(a, b), OracleLpips(a, b, {}), 1e-12);
    LayerWeights w = {{"conv1", {0.5f, 1.0f, 0.0f, 2.0f}},
                      {"conv2", {1, 1, 1, 3, 0.25f, 0}}};
    EXPECT_NEAR(LpipsFrame(a, b, w), OracleLpips(a, b, w), 1e-12);
  }
}

TEST(LpipsFrameTest, IdentitySymmetryAndNonnegativity) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FeatureStack a = RandomStack(seed);
    const FeatureStack b = RandomStack(seed + 500);
    EXPECT_EQ(LpipsFrame(a, a), 0.0);
    EXPECT_GE(LpipsFrame(a, b), 0.0);
    EXPECT_EQ(LpipsFrame(a, b), LpipsFrame(b, a));
  }
}

TEST(LpipsFrameTest, InvariantToPositiveLocationScaling) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> scale(0.1f, 10.0f);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureStack a = RandomStack(seed);
    const FeatureStack b = RandomStack(seed + 77);
    FeatureStack scaled = a;
    for (FeatureLayer& layer : scaled.layers) {
      for (std::int64_t i = 0; i < layer.locations(); ++i) {
        const float k = scale(rng);
        for (std::int64_t c = 0; c < layer.channels; ++c) {
          layer.values[c * layer.locations() + i] *= k;
        }
      }
    }
    EXPECT_NEAR(LpipsFrame(scaled, b), LpipsFrame(a, b), 1e-5);
  }
  FeatureStack five = RandomStack(1);
  for (float& v : five.layers[0].values) v *= 5.0f;
  for (float& v : five.layers[1].values) v *= 5.0f;
  EXPECT_NEAR(LpipsFrame(five, RandomStack(2)),
              LpipsFrame(RandomStack(1), RandomStack(2)), 1e-6);
}

TEST(LpipsFrameTest, ScalesLinearlyWithWeights) {
  const FeatureStack a = RandomStack(8);
  const FeatureStack b = RandomStack(9);
  const LayerWeights ones = {{"conv1", std::vector<float>(4, 1.0f)},
                             {"conv2", std::vector<float>(6, 1.0f)}};
  for (float k : {0.5f, 2.0f, 4.0f}) {
    LayerWeights scaled = ones;
    for (auto& [id, w] : scaled) {
      for (float& x : w) x *= k;
    }
    EXPECT_EQ(LpipsFrame(a, b, scaled), k * LpipsFrame(a, b, ones));
  }
  LayerWeights three = ones;
  for (auto& [id, w] : three) {
    for (float& x : w) x = 3.0f;
  }
  EXPECT_NEAR(LpipsFrame(a, b, three), 3.0 * LpipsFrame(a, b), 1e-12);
}

TEST(LpipsFrameTest, RejectsMismatchedShapes) {
  FeatureStack a = RandomStack(1);
  FeatureStack b = RandomStack(2);
  b.layers[1].width = 2;
  b.layers[1].values.resize(12);
  EXPECT_EQ(ErrorCodeOf([&] { LpipsFrame(a, b); }), ErrorCode::kShapeMismatch);
  b = RandomStack(2);
  b.layers.pop_back();
  EXPECT_EQ(ErrorCodeOf([&] { LpipsFrame(a, b); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(ErrorCodeOf([&] {
              LpipsFrame(a, a, {{"conv1", std::vector<float>(3, 1.0f)},
                                {"conv2", std::vector<float>(6, 1.0f)}});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(LayerWeightsTest, LoadsPerLayerFilesAndRejectsNegatives) {
  ScopedTempDir dir;
  WriteTensorFile({{2}, {0.5f, 1.5f}}, dir.path() / "a.ffr");
  WriteTensorFile({{1}, {-1.0f}}, dir.path() / "b.ffr");
  const LayerWeights w = LoadLayerWeights(dir.path(), {"a"});
  EXPECT_EQ(w.at("a"), (std::vector<float>{0.5f, 1.5f}));
  EXPECT_EQ(ErrorCodeOf([&] { LoadLayerWeights(dir.path(), {"b"}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(ErrorCodeOf([&] { LoadLayerWeights(dir.path(), {"c"}); }),
            ErrorCode::kIoFailure);
}

TEST(FramePairsTest, IndexAlignedResamplesLongerSequence) {
  const auto pairs = FramePairs(10, 30, FramePairing::kIndexAligned, 0);
  ASSERT_EQ(pairs.size(), 10u);
  for (std::int64_t i = 0; i < 10; ++i) {
    EXPECT_EQ(pairs[i].first, i);
    EXPECT_EQ(pairs[i].second, 3 * i + 1);
  }
  const auto same = FramePairs(7, 7, FramePairing::kIndexAligned, 0);
  for (std::int64_t i = 0; i < 7; ++i) {
    EXPECT_EQ(same[i], std::make_pair(i, i));
  }
}

TEST(FramePairsTest, IndexAlignedStaysInRangeAndMonotone) {
  for (std::int64_t la = 1; la <= 40; ++la) {
    for (std::int64_t lb = 1; lb <= 40; ++lb) {
      const auto pairs = FramePairs(la, lb, FramePairing::kIndexAligned, 0);
      ASSERT_EQ(static_cast<std::int64_t>(pairs.size()), std::min(la, lb));
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        ASSERT_LT(pairs[i].first, la);
        ASSERT_LT(pairs[i].second, lb);
        if (i > 0) {
          ASSERT_GT(pairs[i].first, pairs[i - 1].first);
          ASSERT_GT(pairs[i].second, pairs[i - 1].second);
        }
      }
    }
  }
}

TEST(FramePairsTest, AllPairsIsCappedAndDeterministic) {
  const auto pairs = FramePairs(100, 100, FramePairing::kAllPairs, 5);
  EXPECT_EQ(pairs.size(), 64u * 64u);
  EXPECT_EQ(pairs, FramePairs(100, 100, FramePairing::kAllPairs, 5));
  EXPECT_NE(pairs, FramePairs(100, 100, FramePairing::kAllPairs, 6));
  std::set<std::pair<std::int64_t, std::int64_t>> unique(pairs.begin(),
                                                         pairs.end());
  EXPECT_EQ(unique.size(), pairs.size());
  EXPECT_EQ(FramePairs(10, 100, FramePairing::kAllPairs, 5).size(), 640u);
}

TEST(LpipsVideoTest, IdenticalSequencesGiveZero) {
  std::vector<FeatureStack> seq;
  for (int t = 0; t < 12; ++t) seq.push_back(RandomStack(t));
  const LpipsVideoResult r = LpipsVideo(seq, seq);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.std, 0.0);
  EXPECT_EQ(r.count, 12);
}

TEST(LpipsVideoTest, AggregatesFrameScores) {
  std::vector<FeatureStack> a, b;
  for (int t = 0; t < 10; ++t) a.push_back(RandomStack(t));
  for (int t = 0; t < 30; ++t) b.push_back(RandomStack(100 + t));
  const LpipsVideoResult r = LpipsVideo(a, b);
  EXPECT_EQ(r.count, 10);
  std::vector<double> scores;
  for (const auto& [i, j] : FramePairs(10, 30, FramePairing::kIndexAligned, 0)) {
    scores.push_back(LpipsFrame(a[i], b[j]));
  }
  double mean = 0.0;
  for (double s : scores) mean += s / 10.0;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean) / 10.0;
  EXPECT_NEAR(r.mean, mean, 1e-12);
  EXPECT_NEAR(r.std, std::sqrt(var), 1e-12);
}

TEST(LpipsVideoTest, RejectsEmptySequences) {
  std::vector<FeatureStack> a = {RandomStack(1)};
  std::vector<FeatureStack> empty;
  EXPECT_EQ(ErrorCodeOf([&] { LpipsVideo(a, empty); }),
            ErrorCode::kEmptySequence);
}

}  // namespace
}  // namespace restoreval
