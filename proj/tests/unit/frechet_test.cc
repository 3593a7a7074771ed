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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "gtest/gtest.h"
#include "restoreval/error.h"
#include "restoreval/frechet.h"
#include "test_util.h"

namespace restoreval {
namespace {

using ::restoreval::testing::ErrorCodeOf;

FeatureMatrix RandomFeatures(std::int64_t n, std::int64_t d,
                             std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, static_cast<float>(scale));
  FeatureMatrix f(n, d);
  for (float& v : f.values) v = normal(rng);
  return f;
}

Eigen::MatrixXd RandomSpd(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  return a * a.transpose() / d + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

// Reference Fréchet distance through Eigen's own symmetric eigensolver,
// independent of the LAPACK range solver used by the library.
double ReferenceFrechet(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                        const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(s1);
  // Clamp rounding negatives so singular inputs have a real root.
  const Eigen::MatrixXd root =
      e1.eigenvectors() *
      e1.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      e1.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(root * s2 * root);
  // Eigenvalues under d·ε·λmax are rounding noise in a null space.
  const Eigen::VectorXd lambda = inner.eigenvalues();
  const double floor = static_cast<double>(lambda.size()) *
                       std::numeric_limits<double>::epsilon() *
                       std::max(0.0, lambda.maxCoeff());
  double cross = 0.0;
  for (double l : lambda) {
    if (l > floor) cross += std::sqrt(l);
  }
  return (m1 - m2).squaredNorm() + s1.trace() + s2.trace() - 2.0 * cross;
}

TEST(EstimateGaussianTest, ConstantRowsHaveZeroCovariance) {
  FeatureMatrix f(4, 3);
  for (int r = 0; r < 4; ++r) {
    f.at(r, 0) = 1.5f;
    f.at(r, 1) = -2.0f;
    f.at(r, 2) = 7.0f;
  }
  const GaussianSummary g = EstimateGaussian(f);
  EXPECT_EQ(g.mean, Eigen::Vector3d(1.5, -2.0, 7.0));
  EXPECT_TRUE(g.cov.isZero(0.0));
  EXPECT_EQ(g.sample_count, 4);
}

TEST(EstimateGaussianTest, UsesUnbiasedDivisor) {
  FeatureMatrix f(2, 1);
  f.values = {0.0f, 2.0f};
  const GaussianSummary g = EstimateGaussian(f);
  EXPECT_DOUBLE_EQ(g.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(g.cov(0, 0), 2.0);
}

TEST(EstimateGaussianTest, MatchesDoubleLoopCovariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeatureMatrix f = RandomFeatures(5, 3, seed);
    const GaussianSummary g = EstimateGaussian(f);
    double mean[3] = {0, 0, 0};
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 3; ++c) mean[c] += f.at(r, c) / 5.0;
    }
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(g.mean(i), mean[i], 1e-12);
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int r = 0; r < 5; ++r) {
          s += (f.at(r, i) - mean[i]) * (f.at(r, j) - mean[j]);
        }
        EXPECT_NEAR(g.cov(i, j), s / 4.0, 1e-12);
      }
    }
  }
}

TEST(EstimateGaussianTest, KeepsFactorOnlyWhenUnderdetermined) {
  const GaussianSummary wide = EstimateGaussian(RandomFeatures(4, 10, 1));
  ASSERT_TRUE(wide.factor.has_value());
  EXPECT_EQ(wide.factor->rows(), 10);
  EXPECT_EQ(wide.factor->cols(), 4);
  EXPECT_TRUE((*wide.factor * wide.factor->transpose() / 3.0)
                  .isApprox(wide.cov, 1e-12));
  EXPECT_FALSE(EstimateGaussian(RandomFeatures(10, 4, 1)).factor.has_value());
}

TEST(EstimateGaussianTest, RejectsSingleSample) {
  EXPECT_EQ(ErrorCodeOf([] { EstimateGaussian(RandomFeatures(1, 3, 0)); }),
            ErrorCode::kTooFewSamples);
}

TEST(FrechetExactTest, ClosedForms) {
  const int d = 5;
  const GaussianSummary origin = SummaryFromParameters(
      Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d));
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1(0) = 1.0;
  const GaussianSummary shifted =
      SummaryFromParameters(e1, Eigen::MatrixXd::Identity(d, d));
  EXPECT_NEAR(FrechetExact(origin, shifted), 1.0, 1e-9);

  const GaussianSummary four = SummaryFromParameters(
      Eigen::VectorXd::Zero(3), 4.0 * Eigen::MatrixXd::Identity(3, 3));
  const GaussianSummary one = SummaryFromParameters(
      Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_NEAR(FrechetExact(four, one), 3.0, 1e-9);
  EXPECT_EQ(FrechetExact(one, one), 0.0);
}

TEST(FrechetExactTest, MatchesReferenceOnFullCovariances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int d = 3 + static_cast<int>(seed % 6);
    const Eigen::MatrixXd s1 = RandomSpd(d, seed);
    const Eigen::MatrixXd s2 = RandomSpd(d, seed + 100);
    const Eigen::VectorXd m1 = Eigen::VectorXd::LinSpaced(d, 0.0, 1.0);
    const Eigen::VectorXd m2 = Eigen::VectorXd::Constant(d, 0.25);
    const double expected = ReferenceFrechet(m1, s1, m2, s2);
    const double actual = FrechetExact(SummaryFromParameters(m1, s1),
                                       SummaryFromParameters(m2, s2));
    EXPECT_NEAR(actual, expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(FrechetExactTest, IsSymmetricAndNonnegative) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = EstimateGaussian(RandomFeatures(30, 12, seed));
    const auto b = EstimateGaussian(RandomFeatures(20, 12, seed + 50, 1.5));
    const double ab = FrechetExact(a, b);
    const double ba = FrechetExact(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, ba, 1e-9 * std::max(1.0, ab));
  }
}

TEST(FrechetExactTest, HandlesRankDeficientCovariances) {
  // N < d: both covariances are singular.
  const FeatureMatrix fa = RandomFeatures(6, 40, 3);
  const FeatureMatrix fb = RandomFeatures(9, 40, 4);
  const auto a = EstimateGaussian(fa);
  const auto b = EstimateGaussian(fb);
  const double expected = ReferenceFrechet(a.mean, a.cov, b.mean, b.cov);
  EXPECT_NEAR(FrechetExact(a, b), expected, 1e-8 * expected);
  EXPECT_NEAR(FrechetLowRank(fa, fb), expected, 1e-8 * expected);
}

TEST(FrechetExactTest, ReportsErrors) {
  const auto two = SummaryFromParameters(Eigen::VectorXd::Zero(2),
                                         Eigen::MatrixXd::Identity(2, 2));
  const auto three = SummaryFromParameters(Eigen::VectorXd::Zero(3),
                                           Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(ErrorCodeOf([&] { FrechetExact(two, three); }),
            ErrorCode::kDimensionMismatch);

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -0.5;
  EXPECT_EQ(ErrorCodeOf([&] {
              FrechetExact(
                  SummaryFromParameters(Eigen::VectorXd::Zero(2), indefinite),
                  two);
            }),
            ErrorCode::kIndefiniteCovariance);

  Eigen::Matrix2d asymmetric;
  asymmetric << 1.0, 0.5, 0.0, 1.0;
  EXPECT_EQ(ErrorCodeOf([&] {
              SummaryFromParameters(Eigen::VectorXd::Zero(2), asymmetric);
            }),
            ErrorCode::kAsymmetricCovariance);
}

TEST(FrechetExactTest, ClampsTinyNegativeEigenvalues) {
  Eigen::Matrix2d almost;
  almost << 1.0, 0.0, 0.0, -1e-12;
  const auto g = SummaryFromParameters(Eigen::VectorXd::Zero(2), almost);
  const auto one = SummaryFromParameters(Eigen::VectorXd::Zero(2),
                                         Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(FrechetExact(g, one), 1.0, 1e-6);
}

TEST(FrechetLowRankTest, IdenticalInputsGiveZero) {
  const FeatureMatrix f = RandomFeatures(16, 64, 9);
  EXPECT_EQ(FrechetLowRank(f, f), 0.0);

  // Reordered rows describe the same Gaussian without being bitwise equal.
  FeatureMatrix reversed(f.rows, f.dim);
  for (std::int64_t r = 0; r < f.rows; ++r) {
    for (std::int64_t c = 0; c < f.dim; ++c) {
      reversed.at(r, c) = f.at(f.rows - 1 - r, c);
    }
  }
  EXPECT_NEAR(FrechetLowRank(f, reversed), 0.0, 1e-9);
}

TEST(FrechetLowRankTest, AgreesWithExactPath) {
  const std::pair<int, int> shapes[] = {{8, 40}, {40, 8}, {64, 64}, {20, 100}};
  std::uint64_t seed = 0;
  for (const auto& [n, d] : shapes) {
    const FeatureMatrix a = RandomFeatures(n, d, ++seed);
    const FeatureMatrix b = RandomFeatures(n + 3, d, ++seed, 1.3);
    const double exact = FrechetExact(EstimateGaussian(a), EstimateGaussian(b));
    const double fast = FrechetLowRank(a, b);
    EXPECT_NEAR(fast, exact, 1e-6 * exact) << "n=" << n << " d=" << d;
  }
}

TEST(FrechetLowRankTest, ReportsErrors) {
  EXPECT_EQ(ErrorCodeOf([] {
              FrechetLowRank(RandomFeatures(1, 4, 0), RandomFeatures(5, 4, 0));
            }),
            ErrorCode::kTooFewSamples);
  EXPECT_EQ(ErrorCodeOf([] {
              FrechetLowRank(RandomFeatures(5, 4, 0), RandomFeatures(5, 3, 0));
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(FidBetweenSetsTest, IdenticalSetsWithSameSeedGiveZero) {
  const FeatureMatrix f = RandomFeatures(300, 16, 2);
  BatchPolicy policy;
  policy.seed = 7;
  const FidResult r = FidBetweenSets(f, f, policy);
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(r.seed, 7u);
  EXPECT_EQ(r.frames_a, 128);
  EXPECT_EQ(r.frames_b, 128);
  EXPECT_FALSE(r.fallback_used);
}

TEST(FidBetweenSetsTest, IsDeterministicGivenSeed) {
  const FeatureMatrix a = RandomFeatures(200, 16, 3);
  const FeatureMatrix b = RandomFeatures(250, 16, 4, 2.0);
  BatchPolicy policy;
  policy.seed = 99;
  EXPECT_EQ(FidBetweenSets(a, b, policy).distance,
            FidBetweenSets(a, b, policy).distance);
  const FeatureMatrix sa = SelectRows(a, SubsampleIndices(200, 128, 99));
  const FeatureMatrix sb = SelectRows(b, SubsampleIndices(250, 128, 99));
  EXPECT_EQ(FidBetweenSets(a, b, policy).distance, FrechetLowRank(sa, sb));
}

TEST(FidBetweenSetsTest, ShortSetsFallBackOrFail) {
  const FeatureMatrix a = RandomFeatures(50, 8, 3);
  const FeatureMatrix b = RandomFeatures(200, 8, 4);
  BatchPolicy policy;
  const FidResult r = FidBetweenSets(a, b, policy);
  EXPECT_TRUE(r.fallback_used);
  EXPECT_EQ(r.frames_a, 50);
  EXPECT_EQ(r.frames_b, 128);
  policy.allow_fallback = false;
  EXPECT_EQ(ErrorCodeOf([&] { FidBetweenSets(a, b, policy); }),
            ErrorCode::kInsufficientFrames);
  policy.batch = 1;
  EXPECT_EQ(ErrorCodeOf([&] { FidBetweenSets(a, b, policy); }),
            ErrorCode::kInvalidArgument);
}

TEST(SubsampleIndicesTest, ProducesSortedUniformSubsets) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 300);
    const std::int64_t k = static_cast<std::int64_t>(rng() % (n + 1));
    const std::uint64_t seed = rng();
    const auto idx = SubsampleIndices(n, k, seed);
    EXPECT_EQ(static_cast<std::int64_t>(idx.size()), k);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<std::int64_t>(idx.begin(), idx.end()).size(),
              idx.size());
    for (std::int64_t i : idx) {
      EXPECT_GE(i, 0);
      EXPECT_LT(i, n);
    }
    EXPECT_EQ(idx, SubsampleIndices(n, k, seed));
  }
}

TEST(SubsampleIndicesTest, RejectsMoreThanAvailable) {
  EXPECT_EQ(ErrorCodeOf([] { SubsampleIndices(128, 134, 0); }),
            ErrorCode::kInvalidArgument);
}

TEST(SubsampleIndicesTest, EveryIndexIsEquallyLikely) {
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    for (std::int64_t i : SubsampleIndices(10, 3, seed)) ++hits[i];
  }
  // Expected 1500 per index; binomial sd is about 32.
  for (int h : hits) EXPECT_NEAR(h, 1500, 200);
}

}  // namespace
}  // namespace restoreval
