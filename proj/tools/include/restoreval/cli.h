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

#ifndef RESTOREVAL_CLI_H_
#define RESTOREVAL_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "restoreval/lpips.h"
#include "restoreval/study_plan.h"

namespace restoreval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> output_dir;
  std::uint64_t seed = 0;
  std::int64_t fid_batch = 128;
  double shift_window_seconds = 20.0;
  double fps = 30.0;
  std::set<std::string> exclude_channels = {"AU43"};
  FramePairing lpips_pairing = FramePairing::kIndexAligned;
  DtwNormalization dtw_normalization = DtwNormalization::kPathLength;
  TakePolicy take_policy = TakePolicy::kAverage;
  std::optional<std::filesystem::path> lpips_weights_dir;

  PlanConfig ToPlanConfig() const;
  // Stable key/value echo written into every report.
  std::map<std::string, std::string> Echo() const;
};

// Overlays keys present in a JSON object onto `config`. Unknown keys and
// ill-typed values throw restoreval::Error(kInvalidArgument).
void ApplyConfigJson(const std::string& json_text, RunConfig& config);

// Parallelism from RESTOREVAL_THREADS, else the hardware concurrency.
int ThreadsFromEnvironment();

// Renders report.md: the echoed configuration and one table each for
// perceptual, action-unit and emotion metrics.
std::string RenderMarkdownReport(const ResultTable& table,
                                 const std::map<std::string, std::string>& echo,
                                 std::int64_t failed_records);
// Renders report.csv: "# key=value" lines followed by the full table.
std::string RenderCsvReport(const ResultTable& table,
                            const std::map<std::string, std::string>& echo);

// Entry point shared by main() and tests. `args` excludes the program name.
int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

}  // namespace restoreval::cli

#endif  // RESTOREVAL_CLI_H_
