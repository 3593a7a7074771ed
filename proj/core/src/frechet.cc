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

#include "restoreval/frechet.h"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "restoreval/error.h"

namespace restoreval {
namespace {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// N×d centered rows in double, plus the column means.
Eigen::MatrixXd CenteredRows(const FeatureMatrix& f, Eigen::VectorXd* mean) {
  Eigen::Map<const RowMatrixXf> raw(f.values.data(), f.rows, f.dim);
  Eigen::MatrixXd x = raw.cast<double>();
  *mean = x.colwise().mean().transpose();
  x.rowwise() -= mean->transpose();
  return x;
}

void CheckSymmetric(const Eigen::MatrixXd& cov) {
  const double scale = cov.cwiseAbs().maxCoeff();
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryRelative * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::kAsymmetricCovariance,
                "covariance is not symmetric (max |Σ−Σᵀ| = " +
                    std::to_string(asym) + ")");
  }
}

void CheckLapack(lapack_int info, const char* routine) {
  if (info != 0) {
    throw Error(ErrorCode::kIndefiniteCovariance,
                std::string(routine) + " failed with info " +
                    std::to_string(info));
  }
}

// Eigenpairs of a symmetric PSD matrix restricted to its numerical range.
// The matrix is reduced to tridiagonal form once; all eigenvalues come from
// the tridiagonal QR (for the clamp check), and eigenvectors are computed
// only for eigenvalues above the rounding floor d·ε·λ_max, which are the
// only ones that contribute to a matrix square root.
struct RangeEigen {
  Eigen::VectorXd values;   // k, ascending
  Eigen::MatrixXd vectors;  // d×k
};

RangeEigen PositiveRangeEigen(const Eigen::MatrixXd& sym) {
  const lapack_int n = static_cast<lapack_int>(sym.rows());
  RangeEigen out;
  if (n == 0) return out;

  Eigen::MatrixXd a = sym;
  Eigen::VectorXd diag(n), off(std::max(n, 1)), tau(std::max(n - 1, 1));
  CheckLapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n,
                             diag.data(), off.data(), tau.data()),
              "dsytrd");

  Eigen::VectorXd all = diag;
  Eigen::VectorXd off_copy = off;
  CheckLapack(LAPACKE_dsterf(n, all.data(), off_copy.data()), "dsterf");
  const double lambda_max = all(n - 1);
  const double lambda_min = all(0);
  if (lambda_max <= 0.0) {
    if (lambda_min < -kClampRelative * std::abs(lambda_max) ||
        (lambda_max < 0.0)) {
      throw Error(ErrorCode::kIndefiniteCovariance,
                  "covariance has no positive spectrum");
    }
    return out;
  }
  if (lambda_min < -kClampRelative * lambda_max) {
    throw Error(ErrorCode::kIndefiniteCovariance,
                "eigenvalue " + std::to_string(lambda_min) +
                    " below clamp threshold " +
                    std::to_string(-kClampRelative * lambda_max));
  }
  const double floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
      lambda_max;
  const lapack_int first =
      static_cast<lapack_int>(std::upper_bound(all.data(), all.data() + n,
                                               floor) -
                              all.data());
  const lapack_int k = n - first;
  if (k == 0) return out;

  Eigen::VectorXd tri_d = diag;
  Eigen::VectorXd tri_e = off;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  CheckLapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, tri_d.data(),
                             tri_e.data(), 0.0, 0.0, first + 1, n, &found,
                             w.data(), z.data(), n, k, support.data(),
                             &tryrac),
              "dstemr");
  if (found != k) {
    throw Error(ErrorCode::kIndefiniteCovariance,
                "eigensolver returned an unexpected number of pairs");
  }
  CheckLapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, k, a.data(),
                             n, tau.data(), z.data(), n),
              "dormtr");
  out.values = w.head(k).cwiseMax(0.0);
  out.vectors = std::move(z);
  return out;
}

}  // namespace

GaussianSummary EstimateGaussian(const FeatureMatrix& features) {
  if (features.rows < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "covariance needs at least 2 frames, got " +
                    std::to_string(features.rows));
  }
  GaussianSummary g;
  g.sample_count = features.rows;
  Eigen::MatrixXd centered = CenteredRows(features, &g.mean);
  const double scale = 1.0 / static_cast<double>(features.rows - 1);
  g.cov = Eigen::MatrixXd::Zero(features.dim, features.dim);
  g.cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                   scale);
  g.cov.triangularView<Eigen::StrictlyUpper>() =
      g.cov.transpose().triangularView<Eigen::StrictlyUpper>();
  if (features.rows < features.dim) g.factor = centered.transpose();
  return g;
}

GaussianSummary SummaryFromParameters(Eigen::VectorXd mean,
                                      Eigen::MatrixXd cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "covariance shape does not match mean length");
  }
  CheckSymmetric(cov);
  GaussianSummary g;
  g.mean = std::move(mean);
  g.cov = std::move(cov);
  return g;
}

double FrechetExact(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim() != b.dim() || a.cov.rows() != a.dim() ||
      b.cov.rows() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
  if (a.mean == b.mean && a.cov == b.cov) return 0.0;
  CheckSymmetric(a.cov);
  CheckSymmetric(b.cov);

  const double mean_term = (a.mean - b.mean).squaredNorm();

  // Σ_a = V Λ Vᵀ on its range, so Σ_a^{1/2} Σ_b Σ_a^{1/2} = V (Λ^{1/2} Vᵀ Σ_b
  // V Λ^{1/2}) Vᵀ and both share their nonzero spectrum.
  const RangeEigen range = PositiveRangeEigen(a.cov);
  double sqrt_trace = 0.0;
  if (range.values.size() > 0) {
    const Eigen::VectorXd root = range.values.cwiseSqrt();
    Eigen::MatrixXd inner = range.vectors.transpose() *
                            (b.cov.selfadjointView<Eigen::Lower>() *
                             range.vectors);
    inner = root.asDiagonal() * inner * root.asDiagonal();
    inner = 0.5 * (inner + inner.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        inner, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& mu = solver.eigenvalues();
    const double mu_max = mu.maxCoeff();
    if (mu.minCoeff() < -kClampRelative * std::max(mu_max, 0.0)) {
      throw Error(ErrorCode::kIndefiniteCovariance,
                  "Σ₁^{1/2}Σ₂Σ₁^{1/2} has eigenvalue " +
                      std::to_string(mu.minCoeff()));
    }
    sqrt_trace = mu.cwiseMax(0.0).cwiseSqrt().sum();
  }
  const double d2 = mean_term + a.cov.trace() + b.cov.trace() - 2.0 * sqrt_trace;
  return std::max(d2, 0.0);
}

double FrechetLowRank(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows < 2 || b.rows < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 2 frames per side");
  }
  if (a.dim != b.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension " + std::to_string(a.dim) + " vs " +
                    std::to_string(b.dim));
  }
  if (a == b) return 0.0;

  Eigen::VectorXd mean_a, mean_b;
  const Eigen::MatrixXd xa = CenteredRows(a, &mean_a);  // N₁×d = X̃₁ᵀ
  const Eigen::MatrixXd xb = CenteredRows(b, &mean_b);  // N₂×d = X̃₂ᵀ
  const double na = static_cast<double>(a.rows - 1);
  const double nb = static_cast<double>(b.rows - 1);

  // C = X̃₁ᵀX̃₂ / √((N₁−1)(N₂−1)). The eigenvalues of CCᵀ are the squared
  // singular values of C, so Tr((Σ₁Σ₂)^{1/2}) is the sum of those singular
  // values; taking them from an SVD avoids squaring the condition number.
  const Eigen::MatrixXd c = (xa * xb.transpose()) / std::sqrt(na * nb);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c);
  const double sqrt_trace = svd.singularValues().sum();

  const double trace_a = xa.squaredNorm() / na;
  const double trace_b = xb.squaredNorm() / nb;
  const double d2 =
      (mean_a - mean_b).squaredNorm() + trace_a + trace_b - 2.0 * sqrt_trace;
  return std::max(d2, 0.0);
}

std::vector<std::int64_t> SubsampleIndices(std::int64_t n, std::int64_t k,
                                           std::uint64_t seed) {
  if (k < 0 || k > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot draw " + std::to_string(k) + " of " +
                    std::to_string(n));
  }
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::int64_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

FeatureMatrix SelectRows(const FeatureMatrix& features,
                         const std::vector<std::int64_t>& rows) {
  FeatureMatrix out(static_cast<std::int64_t>(rows.size()), features.dim,
                    features.source);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(i) * features.dim);
  }
  return out;
}

FidResult FidBetweenSets(const FeatureMatrix& a, const FeatureMatrix& b,
                         const BatchPolicy& policy) {
  if (policy.batch < 2) {
    throw Error(ErrorCode::kInvalidArgument, "batch must be at least 2");
  }
  FidResult result;
  result.seed = policy.seed;
  auto draw = [&](const FeatureMatrix& side, const char* name) {
    std::int64_t k = policy.batch;
    if (side.rows < policy.batch) {
      if (!policy.allow_fallback) {
        throw Error(ErrorCode::kInsufficientFrames,
                    std::string(name) + " has " + std::to_string(side.rows) +
                        " frames, batch is " + std::to_string(policy.batch));
      }
      k = side.rows;
      result.fallback_used = true;
    }
    return SelectRows(side, SubsampleIndices(side.rows, k, policy.seed));
  };
  const FeatureMatrix sa = draw(a, "set a");
  const FeatureMatrix sb = draw(b, "set b");
  result.frames_a = sa.rows;
  result.frames_b = sb.rows;
  result.distance = FrechetLowRank(sa, sb);
  return result;
}

}  // namespace restoreval
