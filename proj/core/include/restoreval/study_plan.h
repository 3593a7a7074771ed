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

#ifndef RESTOREVAL_STUDY_PLAN_H_
#define RESTOREVAL_STUDY_PLAN_H_

// Session-pairing protocol: per subject and task, one cross-session baseline
// between the two normal recordings, and within each session one job per
// sensor take and per clean take against that session's normal recording.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "restoreval/catalog.h"
#include "restoreval/lpips.h"
#include "restoreval/series_metrics.h"
#include "restoreval/types.h"

namespace restoreval {

enum class PairingLabel { kN1N2, kN1S1, kN1C1, kN2S2, kN2C2 };
inline constexpr PairingLabel kAllPairingLabels[] = {
    PairingLabel::kN1N2, PairingLabel::kN1S1, PairingLabel::kN1C1,
    PairingLabel::kN2S2, PairingLabel::kN2C2};

enum class Metric { kLpips, kFid, kAuDtw, kAuMape, kEmoDtw, kEmoMape };
inline constexpr Metric kAllMetrics[] = {Metric::kLpips,  Metric::kFid,
                                         Metric::kAuDtw,  Metric::kAuMape,
                                         Metric::kEmoDtw, Metric::kEmoMape};

// Column order used by reports.
inline constexpr Task kReportTaskOrder[] = {Task::kSchaede, Task::kEmotion,
                                            Task::kSentence};

std::string_view ToString(PairingLabel label);  // "N1-N2"
std::string_view ToString(Metric metric);       // "lpips", "au_dtw", ...
std::optional<PairingLabel> ParsePairingLabel(std::string_view text);
std::optional<Metric> ParseMetric(std::string_view text);

struct ComparisonJob {
  RecordingKey left;
  RecordingKey right;
  PairingLabel label = PairingLabel::kN1N2;
  std::set<Metric> metrics;

  const std::string& subject() const { return left.subject_id; }
  Task task() const { return left.task; }
  int take() const { return right.take_index; }
};

// Throws kMissingBaseline if a subject has recordings for a task but lacks a
// normal recording in either session. Jobs are sorted by (subject, task,
// label, take).
std::vector<ComparisonJob> BuildPairings(
    const RecordingCatalog& catalog,
    const std::set<Metric>& metrics = {std::begin(kAllMetrics),
                                       std::end(kAllMetrics)});

enum class TakePolicy { kAverage, kFirst };
enum class DtwNormalization { kPathLength, kRaw };

struct PlanConfig {
  std::uint64_t seed = 0;
  std::int64_t fid_batch = 128;
  bool fid_allow_fallback = true;
  double shift_window_seconds = kDefaultShiftWindowSeconds;
  double fps = 30.0;  // used when a series has a single row
  std::set<std::string> exclude_channels = {"AU43"};
  FramePairing lpips_pairing = FramePairing::kIndexAligned;
  DtwNormalization dtw_normalization = DtwNormalization::kPathLength;
  std::optional<std::filesystem::path> lpips_weights_dir;
};

struct ScoreRecord {
  std::string subject;
  Task task = Task::kSchaede;
  PairingLabel label = PairingLabel::kN1N2;
  RecordingKey left;
  RecordingKey right;
  Metric metric = Metric::kLpips;
  std::optional<double> value;  // empty when the job failed
  std::uint64_t seed = 0;
  std::string error;

  bool ok() const { return value.has_value(); }
};

// Seed for one job, independent of scheduling order.
std::uint64_t JobSeed(std::uint64_t root_seed, const ComparisonJob& job);

// Runs every metric of every job. Failures are recorded per (job, metric)
// and never abort the plan. Output order follows `jobs`, then metric order,
// regardless of `threads`.
std::vector<ScoreRecord> RunPlan(const RecordingCatalog& catalog,
                                 const std::vector<ComparisonJob>& jobs,
                                 const PlanConfig& config, int threads = 1);

// A single metric for a single job; throws on failure.
double ScoreJob(const RecordingCatalog& catalog, const ComparisonJob& job,
                Metric metric, const PlanConfig& config, std::uint64_t seed);

std::string FormatScores(const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> ParseScores(std::string_view text);

struct CellStats {
  double mean = 0.0;
  double std = 0.0;
  std::int64_t n = 0;
};

struct ResultTable {
  using CellKey = std::tuple<PairingLabel, Task, Metric>;
  std::map<CellKey, CellStats> cells;
  // Echoed into rendered reports: seeds, guards, conventions.
  std::map<std::string, std::string> metadata;

  bool empty() const { return cells.empty(); }
  const CellStats* Find(PairingLabel label, Task task, Metric metric) const;
  std::set<Metric> metrics() const;
};

// Takes within a session are averaged per subject first (or only the lowest
// take is kept under kFirst), then mean and population std across subjects.
// Only successful records contribute.
ResultTable Aggregate(const std::vector<ScoreRecord>& records,
                      TakePolicy take_policy = TakePolicy::kAverage);

enum class TableFormat { kCsv, kMarkdown };

// Rows are the five pairing labels in protocol order; columns are metric ×
// task; cells read "mean±std". An empty table renders its header only.
std::string RenderTable(const ResultTable& table, TableFormat format);

// "%.6g" with a trailing ".0" for integral values.
std::string FormatNumber(double value);

}  // namespace restoreval

#endif  // RESTOREVAL_STUDY_PLAN_H_
