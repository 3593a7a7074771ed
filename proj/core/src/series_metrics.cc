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

#include "restoreval/series_metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "restoreval/error.h"
#include "restoreval/stats.h"

namespace restoreval {
namespace {

struct Cell {
  double cost;
  std::int64_t length;
};

bool Better(const Cell& x, const Cell& y) {
  return x.cost < y.cost || (x.cost == y.cost && x.length < y.length);
}

// Strict "x is preferred over y" for (score, shift) candidates.
bool PreferShift(double score_x, std::int64_t shift_x, double score_y,
                 std::int64_t shift_y) {
  if (score_x != score_y) return score_x < score_y;
  const std::int64_t ax = shift_x < 0 ? -shift_x : shift_x;
  const std::int64_t ay = shift_y < 0 ? -shift_y : shift_y;
  if (ax != ay) return ax < ay;
  return shift_x < shift_y;
}

}  // namespace

DtwResult Dtw(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kEmptySeries, "DTW needs non-empty series");
  }
  const std::size_t m = b.size();
  std::vector<Cell> prev(m), curr(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = std::abs(a[i] - b[j]);
      Cell best{0.0, 0};
      if (i == 0 && j == 0) {
        best = {0.0, 0};
      } else if (i == 0) {
        best = curr[j - 1];
      } else if (j == 0) {
        best = prev[j];
      } else {
        best = prev[j - 1];
        if (Better(prev[j], best)) best = prev[j];
        if (Better(curr[j - 1], best)) best = curr[j - 1];
      }
      curr[j] = {best.cost + local, best.length + 1};
    }
    std::swap(prev, curr);
  }
  const Cell& end = prev[m - 1];
  return {end.cost, end.length,
          end.cost / static_cast<double>(end.length)};
}

std::int64_t ShiftOverlap(std::int64_t ref_length, std::int64_t other_length,
                          std::int64_t shift) {
  const std::int64_t begin = std::max<std::int64_t>(0, -shift);
  const std::int64_t end = std::min(ref_length, other_length - shift);
  return std::max<std::int64_t>(0, end - begin);
}

bool ShiftFeasible(std::int64_t ref_length, std::int64_t other_length,
                   std::int64_t shift) {
  const std::int64_t overlap = ShiftOverlap(ref_length, other_length, shift);
  return overlap >= 1 && 2 * overlap >= std::min(ref_length, other_length);
}

double MapeAtShift(std::span<const double> ref, std::span<const double> other,
                   std::int64_t shift) {
  const auto ref_length = static_cast<std::int64_t>(ref.size());
  const auto other_length = static_cast<std::int64_t>(other.size());
  if (ref_length == 0 || other_length == 0) {
    throw Error(ErrorCode::kEmptySeries, "MAPE needs non-empty series");
  }
  if (!ShiftFeasible(ref_length, other_length, shift)) {
    throw Error(ErrorCode::kInsufficientOverlap,
                "shift " + std::to_string(shift) + " leaves " +
                    std::to_string(ShiftOverlap(ref_length, other_length,
                                                shift)) +
                    " overlapping frames");
  }
  const std::int64_t begin = std::max<std::int64_t>(0, -shift);
  const std::int64_t end = std::min(ref_length, other_length - shift);
  double sum = 0.0;
  for (std::int64_t t = begin; t < end; ++t) {
    const double denom = std::max(std::abs(ref[t]), kMapeEpsilon);
    sum += std::abs(ref[t] - other[t + shift]) / denom;
  }
  return sum / static_cast<double>(end - begin);
}

std::int64_t WindowFrames(double window_seconds, double fps) {
  if (!(window_seconds > 0.0) || !(fps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "shift window and fps must be positive");
  }
  return static_cast<std::int64_t>(std::llround(window_seconds * fps));
}

ShiftedMapeResult MapeBestShift(std::span<const double> ref,
                                std::span<const double> other,
                                double window_seconds, double fps) {
  const std::int64_t window = WindowFrames(window_seconds, fps);
  const auto ref_length = static_cast<std::int64_t>(ref.size());
  const auto other_length = static_cast<std::int64_t>(other.size());
  if (ref_length == 0 || other_length == 0) {
    throw Error(ErrorCode::kEmptySeries, "MAPE needs non-empty series");
  }
  ShiftedMapeResult result;
  result.window_frames = window;
  bool found = false;
  for (std::int64_t shift = -window; shift <= window; ++shift) {
    if (!ShiftFeasible(ref_length, other_length, shift)) continue;
    const double score = MapeAtShift(ref, other, shift);
    if (!found || PreferShift(score, shift, result.best_score,
                              result.best_shift_frames)) {
      result.best_score = score;
      result.best_shift_frames = shift;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kInsufficientOverlap,
                "no shift within ±" + std::to_string(window) +
                    " frames leaves enough overlap");
  }
  return result;
}

MultichannelResult CompareMultichannel(const TimeSeries& a, const TimeSeries& b,
                                       const MultichannelOptions& options) {
  MultichannelResult result;
  std::vector<std::string> names_b;
  for (const std::string& name : b.channel_names()) {
    if (!options.exclude.contains(name)) names_b.push_back(name);
  }
  for (const std::string& name : a.channel_names()) {
    if (!options.exclude.contains(name)) result.channels.push_back(name);
  }
  {
    std::vector<std::string> sa = result.channels, sb = names_b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) {
      throw Error(ErrorCode::kChannelMismatch,
                  "channel sets differ after exclusion");
    }
  }
  if (result.channels.empty()) {
    throw Error(ErrorCode::kChannelMismatch, "no channels left to compare");
  }
  for (const std::string& name : result.channels) {
    const std::vector<double> x = a.Channel(*a.ChannelIndex(name));
    const std::vector<double> y = b.Channel(*b.ChannelIndex(name));
    double score = 0.0;
    switch (options.metric) {
      case SeriesMetric::kDtwNormalized:
        score = Dtw(x, y).normalized_cost;
        break;
      case SeriesMetric::kDtwRaw:
        score = Dtw(x, y).total_cost;
        break;
      case SeriesMetric::kMapeShift:
        score = MapeBestShift(x, y, options.window_seconds, a.fps()).best_score;
        break;
    }
    result.scores.push_back(score);
  }
  const MeanStd stats = ComputeMeanStd(result.scores);
  result.mean = stats.mean;
  result.std = stats.std;
  return result;
}

}  // namespace restoreval
