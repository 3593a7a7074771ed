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

#ifndef RESTOREVAL_FRECHET_H_
#define RESTOREVAL_FRECHET_H_

// Fréchet distance between Gaussians fitted to feature sets:
//
//   d² = ‖μ₁ − μ₂‖² + Tr(Σ₁ + Σ₂ − 2 (Σ₁Σ₂)^{1/2})
//
// Two independent routes are provided. FrechetExact works on the d×d
// covariances through the symmetric form Tr((Σ₁^{1/2} Σ₂ Σ₁^{1/2})^{1/2}).
// FrechetLowRank never forms a d×d product: with centered factors X̃ᵢ (d×Nᵢ),
// the nonzero eigenvalues of Σ₁Σ₂ equal those of the N₁×N₁ matrix
// (X̃₁ᵀX̃₂)(X̃₂ᵀX̃₁) / ((N₁−1)(N₂−1)).

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "restoreval/types.h"

namespace restoreval {

// Eigenvalues in [−kClampRelative·λ_max, 0) are clamped to zero; anything
// more negative is reported as kIndefiniteCovariance.
inline constexpr double kClampRelative = 1e-8;
inline constexpr double kSymmetryRelative = 1e-8;
inline constexpr std::int64_t kDefaultFidBatch = 128;

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // d×d, unbiased (divisor N−1)
  // Centered d×N factor with cov = factor·factorᵀ/(N−1); kept when N < d.
  std::optional<Eigen::MatrixXd> factor;
  std::int64_t sample_count = 0;

  std::int64_t dim() const { return mean.size(); }
};

// Throws kTooFewSamples when N < 2.
GaussianSummary EstimateGaussian(const FeatureMatrix& features);

// Summary from known parameters (sample_count = 0). Validates shape and
// symmetry.
GaussianSummary SummaryFromParameters(Eigen::VectorXd mean,
                                      Eigen::MatrixXd cov);

double FrechetExact(const GaussianSummary& a, const GaussianSummary& b);

double FrechetLowRank(const FeatureMatrix& a, const FeatureMatrix& b);

struct BatchPolicy {
  std::int64_t batch = kDefaultFidBatch;
  std::uint64_t seed = 0;
  // When false, a side with fewer than `batch` frames is an error; when true
  // all of its frames are used.
  bool allow_fallback = true;
};

struct FidResult {
  double distance = 0.0;
  std::uint64_t seed = 0;
  std::int64_t frames_a = 0;
  std::int64_t frames_b = 0;
  bool fallback_used = false;
};

// Draws one seeded subsample (uniform, without replacement) of `batch` rows
// per side, each side from a fresh generator seeded with `policy.seed`, then
// applies FrechetLowRank.
FidResult FidBetweenSets(const FeatureMatrix& a, const FeatureMatrix& b,
                         const BatchPolicy& policy);

// Sorted indices of a uniform k-subset of [0, n).
std::vector<std::int64_t> SubsampleIndices(std::int64_t n, std::int64_t k,
                                           std::uint64_t seed);

FeatureMatrix SelectRows(const FeatureMatrix& features,
                         const std::vector<std::int64_t>& rows);

}  // namespace restoreval

#endif  // RESTOREVAL_FRECHET_H_
