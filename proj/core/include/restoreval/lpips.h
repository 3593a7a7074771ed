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

#ifndef RESTOREVAL_LPIPS_H_
#define RESTOREVAL_LPIPS_H_

// LPIPS-style distance over externally supplied activations:
//
//   d(a, b) = Σ_l 1/(H_l W_l) Σ_{h,w} Σ_c w_{l,c} (â − b̂)²_{c,h,w}
//
// where â, b̂ are unit-normalized along the channel axis at every location.
// Values are not clamped to [0, 1].

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "restoreval/types.h"

namespace restoreval {

inline constexpr double kNormEpsilon = 1e-10;
inline constexpr std::int64_t kAllPairsCap = 64;

// layer id -> per-channel weight. An empty map means all-ones.
using LayerWeights = std::map<std::string, std::vector<float>>;

// Loads "<dir>/<layer_id>.ffr" for every layer id (1-d FFR1 tensors).
LayerWeights LoadLayerWeights(const std::filesystem::path& dir,
                              const std::vector<std::string>& layer_ids);

FeatureStack NormalizeStack(const FeatureStack& stack);

double LpipsFrame(const FeatureStack& a, const FeatureStack& b,
                  const LayerWeights& weights = {});

enum class FramePairing {
  // Longer sequence resampled to the shorter length, then index-aligned.
  kIndexAligned,
  // All pairs over a seeded subsample of at most kAllPairsCap frames a side.
  kAllPairs,
};

struct LpipsVideoResult {
  double mean = 0.0;
  double std = 0.0;  // population
  std::int64_t count = 0;
};

LpipsVideoResult LpipsVideo(std::span<const FeatureStack> seq_a,
                            std::span<const FeatureStack> seq_b,
                            const LayerWeights& weights = {},
                            FramePairing pairing = FramePairing::kIndexAligned,
                            std::uint64_t seed = 0);

// Index pairs used by LpipsVideo, exposed for inspection and tests.
std::vector<std::pair<std::int64_t, std::int64_t>> FramePairs(
    std::int64_t length_a, std::int64_t length_b, FramePairing pairing,
    std::uint64_t seed);

}  // namespace restoreval

#endif  // RESTOREVAL_LPIPS_H_
