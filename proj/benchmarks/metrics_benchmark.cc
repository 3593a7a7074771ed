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

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "restoreval/frechet.h"
#include "restoreval/series_metrics.h"
#include "restoreval/synth.h"

namespace restoreval {
namespace {

FeatureMatrix Features(std::int64_t n, std::int64_t d, double variance,
                       std::uint64_t seed) {
  return SampleGaussianFeatures(
      GaussianSpec::Isotropic(Eigen::VectorXd::Zero(d), variance, seed), n);
}

void BM_FrechetExact(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  const GaussianSummary a = EstimateGaussian(Features(128, d, 1.0, 1));
  const GaussianSummary b = EstimateGaussian(Features(128, d, 2.0, 2));
  for (auto _ : state) benchmark::DoNotOptimize(FrechetExact(a, b));
}
BENCHMARK(BM_FrechetExact)->Arg(256)->Arg(1024)->Arg(2048)
    ->Unit(benchmark::kMillisecond);

void BM_FrechetLowRank(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  const FeatureMatrix a = Features(128, d, 1.0, 1);
  const FeatureMatrix b = Features(128, d, 2.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(FrechetLowRank(a, b));
}
BENCHMARK(BM_FrechetLowRank)->Arg(256)->Arg(1024)->Arg(2048)
    ->Unit(benchmark::kMillisecond);

void BM_Dtw(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto a = RandomWalkSignal(n, 1.0, 0.0, 3);
  const auto b = RandomWalkSignal(n, 1.0, 0.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Dtw(a, b));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Dtw)->RangeMultiplier(2)->Range(256, 4096)
    ->Complexity(benchmark::oNSquared);

void BM_MapeBestShift(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto a = RandomWalkSignal(n, 1.0, 0.5, 5);
  const auto b = RandomWalkSignal(n, 1.0, 0.5, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(MapeBestShift(a, b, 20.0, 30.0));
  }
}
BENCHMARK(BM_MapeBestShift)->Arg(1200)->Arg(3000);

}  // namespace
}  // namespace restoreval

BENCHMARK_MAIN();
