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

#ifndef RESTOREVAL_SERIES_METRICS_H_
#define RESTOREVAL_SERIES_METRICS_H_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "restoreval/types.h"

namespace restoreval {

// Denominator guard for MAPE: |ref_t| below this is replaced by it.
inline constexpr double kMapeEpsilon = 1e-2;
inline constexpr double kDefaultShiftWindowSeconds = 20.0;

struct DtwResult {
  double total_cost = 0.0;
  std::int64_t path_length = 0;
  double normalized_cost = 0.0;  // total_cost / path_length
};

// Unconstrained DTW with local cost |a_i − b_j| and steps (i−1, j),
// (i, j−1), (i−1, j−1). Among equal-cost optimal paths the shortest is
// reported. O(T_a·T_b) time, O(T_b) memory.
DtwResult Dtw(std::span<const double> a, std::span<const double> b);

// Positive `shift` means `other` lags `ref`: ref_t is compared with
// other_{t+shift}. Requires the overlap to cover at least half of
// min(T_ref, T_other), otherwise kInsufficientOverlap.
double MapeAtShift(std::span<const double> ref, std::span<const double> other,
                   std::int64_t shift);

// Number of overlapping frames at `shift`, and whether it is admissible.
std::int64_t ShiftOverlap(std::int64_t ref_length, std::int64_t other_length,
                          std::int64_t shift);
bool ShiftFeasible(std::int64_t ref_length, std::int64_t other_length,
                   std::int64_t shift);

struct ShiftedMapeResult {
  double best_score = 0.0;  // fraction, not percent
  std::int64_t best_shift_frames = 0;
  std::int64_t window_frames = 0;
};

// round(window_seconds · fps), the shift range searched on each side.
std::int64_t WindowFrames(double window_seconds, double fps);

// Exhaustive scan of every integer shift in [−W, W]. Ties go to the smaller
// |shift|, then to the negative shift.
ShiftedMapeResult MapeBestShift(std::span<const double> ref,
                                std::span<const double> other,
                                double window_seconds, double fps);

enum class SeriesMetric { kDtwNormalized, kDtwRaw, kMapeShift };

struct MultichannelOptions {
  SeriesMetric metric = SeriesMetric::kDtwNormalized;
  std::set<std::string> exclude = {"AU43"};
  double window_seconds = kDefaultShiftWindowSeconds;
};

struct MultichannelResult {
  std::vector<std::string> channels;  // scored channels, in `a`'s order
  std::vector<double> scores;
  double mean = 0.0;
  double std = 0.0;  // population
};

// Applies the metric per channel (after removing `exclude`) and aggregates
// with an unweighted mean. For kMapeShift, `a` is the reference and the
// window uses `a.fps()`.
MultichannelResult CompareMultichannel(const TimeSeries& a, const TimeSeries& b,
                                       const MultichannelOptions& options);

}  // namespace restoreval

#endif  // RESTOREVAL_SERIES_METRICS_H_
