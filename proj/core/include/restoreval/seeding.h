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

#ifndef RESTOREVAL_SEEDING_H_
#define RESTOREVAL_SEEDING_H_

#include <cstdint>
#include <string_view>

namespace restoreval {

std::uint64_t SplitMix64(std::uint64_t x);

// Stable across platforms and runs: FNV-1a of `label`, mixed with `root`.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view label);

}  // namespace restoreval

#endif  // RESTOREVAL_SEEDING_H_
