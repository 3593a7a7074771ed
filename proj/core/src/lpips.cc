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

#include "restoreval/lpips.h"

#include <algorithm>
#include <cmath>

#include "restoreval/error.h"
#include "restoreval/frechet.h"
#include "restoreval/stats.h"
#include "restoreval/tensor_io.h"

namespace restoreval {
namespace {

void CheckCompatible(const FeatureStack& a, const FeatureStack& b) {
  if (a.layers.size() != b.layers.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "stacks have " + std::to_string(a.layers.size()) + " and " +
                    std::to_string(b.layers.size()) + " layers");
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const FeatureLayer& x = a.layers[l];
    const FeatureLayer& y = b.layers[l];
    if (x.id != y.id || x.channels != y.channels || x.height != y.height ||
        x.width != y.width) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(l) + " ('" + x.id + "' vs '" +
                      y.id + "') differs in id or shape");
    }
    if (static_cast<std::int64_t>(x.values.size()) !=
            x.channels * x.locations() ||
        static_cast<std::int64_t>(y.values.size()) !=
            y.channels * y.locations()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer '" + x.id + "' tensor does not match its dims");
    }
  }
}

const std::vector<float>* WeightsFor(const LayerWeights& weights,
                                     const FeatureLayer& layer) {
  if (weights.empty()) return nullptr;
  auto it = weights.find(layer.id);
  if (it == weights.end()) {
    throw Error(ErrorCode::kShapeMismatch,
                "no weights for layer '" + layer.id + "'");
  }
  if (static_cast<std::int64_t>(it->second.size()) != layer.channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "weights for layer '" + layer.id + "' have " +
                    std::to_string(it->second.size()) + " entries, expected " +
                    std::to_string(layer.channels));
  }
  return &it->second;
}

// Channel norm at every location, computed in double.
std::vector<double> LocationNorms(const FeatureLayer& layer) {
  const std::int64_t hw = layer.locations();
  std::vector<double> norms(static_cast<std::size_t>(hw), 0.0);
  for (std::int64_t c = 0; c < layer.channels; ++c) {
    const float* plane = layer.values.data() + c * hw;
    for (std::int64_t i = 0; i < hw; ++i) {
      norms[i] += static_cast<double>(plane[i]) * plane[i];
    }
  }
  for (double& n : norms) n = std::sqrt(n);
  return norms;
}

double InverseNorm(double norm) {
  return norm < kNormEpsilon ? 0.0 : 1.0 / norm;
}

}  // namespace

LayerWeights LoadLayerWeights(const std::filesystem::path& dir,
                              const std::vector<std::string>& layer_ids) {
  LayerWeights weights;
  for (const std::string& id : layer_ids) {
    Tensor t = ReadTensorFile(dir / (id + ".ffr"));
    if (t.dims.size() != 1) {
      throw Error(ErrorCode::kShapeMismatch,
                  "weight file for '" + id + "' must be 1-d");
    }
    for (float w : t.values) {
      if (w < 0.0f) {
        throw Error(ErrorCode::kInvalidArgument,
                    "negative weight in layer '" + id + "'");
      }
    }
    weights.emplace(id, std::move(t.values));
  }
  return weights;
}

FeatureStack NormalizeStack(const FeatureStack& stack) {
  FeatureStack out = stack;
  for (FeatureLayer& layer : out.layers) {
    const std::int64_t hw = layer.locations();
    const std::vector<double> norms = LocationNorms(layer);
    for (std::int64_t c = 0; c < layer.channels; ++c) {
      float* plane = layer.values.data() + c * hw;
      for (std::int64_t i = 0; i < hw; ++i) {
        plane[i] = static_cast<float>(plane[i] * InverseNorm(norms[i]));
      }
    }
  }
  return out;
}

double LpipsFrame(const FeatureStack& a, const FeatureStack& b,
                  const LayerWeights& weights) {
  CheckCompatible(a, b);
  if (!weights.empty() && weights.size() != a.layers.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "weight layers do not match the stack layers");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const FeatureLayer& x = a.layers[l];
    const FeatureLayer& y = b.layers[l];
    const std::vector<float>* w = WeightsFor(weights, x);
    const std::int64_t hw = x.locations();
    const std::vector<double> nx = LocationNorms(x);
    const std::vector<double> ny = LocationNorms(y);
    double layer_sum = 0.0;
    for (std::int64_t c = 0; c < x.channels; ++c) {
      const double wc = w ? static_cast<double>((*w)[c]) : 1.0;
      const float* px = x.values.data() + c * hw;
      const float* py = y.values.data() + c * hw;
      double channel_sum = 0.0;
      for (std::int64_t i = 0; i < hw; ++i) {
        const double diff =
            px[i] * InverseNorm(nx[i]) - py[i] * InverseNorm(ny[i]);
        channel_sum += diff * diff;
      }
      layer_sum += wc * channel_sum;
    }
    total += layer_sum / static_cast<double>(hw);
  }
  return total;
}

std::vector<std::pair<std::int64_t, std::int64_t>> FramePairs(
    std::int64_t length_a, std::int64_t length_b, FramePairing pairing,
    std::uint64_t seed) {
  if (length_a < 1 || length_b < 1) {
    throw Error(ErrorCode::kEmptySequence, "both sequences need frames");
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  if (pairing == FramePairing::kIndexAligned) {
    const std::int64_t n = std::min(length_a, length_b);
    pairs.reserve(static_cast<std::size_t>(n));
    // Centre of the i-th of n equal bins over the longer sequence.
    auto resample = [n](std::int64_t i, std::int64_t length) {
      if (length == n) return i;
      return static_cast<std::int64_t>(
          ((2 * i + 1) * length) / (2 * n));
    };
    for (std::int64_t i = 0; i < n; ++i) {
      pairs.emplace_back(resample(i, length_a), resample(i, length_b));
    }
    return pairs;
  }
  const auto rows_a = SubsampleIndices(
      length_a, std::min(length_a, kAllPairsCap), seed);
  const auto rows_b = SubsampleIndices(
      length_b, std::min(length_b, kAllPairsCap), seed ^ 0x9e3779b97f4a7c15ULL);
  pairs.reserve(rows_a.size() * rows_b.size());
  for (std::int64_t i : rows_a) {
    for (std::int64_t j : rows_b) pairs.emplace_back(i, j);
  }
  return pairs;
}

LpipsVideoResult LpipsVideo(std::span<const FeatureStack> seq_a,
                            std::span<const FeatureStack> seq_b,
                            const LayerWeights& weights, FramePairing pairing,
                            std::uint64_t seed) {
  if (seq_a.empty() || seq_b.empty()) {
    throw Error(ErrorCode::kEmptySequence, "both sequences need frames");
  }
  const auto pairs = FramePairs(static_cast<std::int64_t>(seq_a.size()),
                                static_cast<std::int64_t>(seq_b.size()),
                                pairing, seed);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    scores.push_back(LpipsFrame(seq_a[i], seq_b[j], weights));
  }
  const MeanStd stats = ComputeMeanStd(scores);
  return {stats.mean, stats.std, static_cast<std::int64_t>(scores.size())};
}

}  // namespace restoreval
