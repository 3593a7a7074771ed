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

#ifndef RESTOREVAL_STATS_H_
#define RESTOREVAL_STATS_H_

#include <cstdint>
#include <span>

namespace restoreval {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population convention (divisor n)
  std::int64_t n = 0;
};

// Two-pass, summed in the given order. Empty input yields {0, 0, 0}.
MeanStd ComputeMeanStd(std::span<const double> values);

}  // namespace restoreval

#endif  // RESTOREVAL_STATS_H_
