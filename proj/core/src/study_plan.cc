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

#include "restoreval/study_plan.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "json.hpp"
#include "restoreval/error.h"
#include "restoreval/frechet.h"
#include "restoreval/seeding.h"
#include "restoreval/series_io.h"
#include "restoreval/stats.h"
#include "restoreval/tensor_io.h"

namespace restoreval {
namespace {

constexpr std::string_view kFeaturePrefix = "features:";

const RecordingRef& RequireRef(const RecordingCatalog& catalog,
                               const RecordingKey& key) {
  const RecordingRef* ref = catalog.Find(key);
  if (ref == nullptr) {
    throw Error(ErrorCode::kMissingArtifact,
                "recording " + ToString(key) + " is not in the catalog");
  }
  return *ref;
}

const std::filesystem::path& RequireArtifact(const RecordingRef& ref,
                                             const std::string& kind) {
  auto it = ref.artifacts.find(kind);
  if (it == ref.artifacts.end()) {
    throw Error(ErrorCode::kMissingArtifact,
                ToString(ref.key) + " has no '" + kind + "' artifact");
  }
  return it->second;
}

std::vector<std::pair<std::string, std::filesystem::path>> FeatureLayers(
    const RecordingRef& ref) {
  std::vector<std::pair<std::string, std::filesystem::path>> layers;
  for (const auto& [kind, path] : ref.artifacts) {
    if (kind.starts_with(kFeaturePrefix)) {
      layers.emplace_back(kind.substr(kFeaturePrefix.size()), path);
    }
  }
  if (layers.empty()) {
    throw Error(ErrorCode::kMissingArtifact,
                ToString(ref.key) + " has no feature layers");
  }
  return layers;
}

TimeSeries LoadSeries(const RecordingRef& ref, const std::string& kind,
                      const PlanConfig& config) {
  TimeSeries series = ReadSeriesCsv(RequireArtifact(ref, kind), config.fps);
  if (ref.fps && series.frames() > 1 &&
      std::abs(series.fps() - *ref.fps) > 1e-3 * *ref.fps) {
    throw Error(ErrorCode::kHeaderMismatch,
                ToString(ref.key) + ": '" + kind + "' runs at " +
                    std::to_string(series.fps()) + " fps, manifest says " +
                    std::to_string(*ref.fps));
  }
  return series;
}

double SeriesScore(const RecordingRef& left, const RecordingRef& right,
                   const std::string& kind, bool mape,
                   const PlanConfig& config) {
  const TimeSeries a = LoadSeries(left, kind, config);
  const TimeSeries b = LoadSeries(right, kind, config);
  MultichannelOptions options;
  options.exclude = config.exclude_channels;
  options.window_seconds = config.shift_window_seconds;
  if (mape) {
    options.metric = SeriesMetric::kMapeShift;
  } else {
    options.metric = config.dtw_normalization == DtwNormalization::kPathLength
                         ? SeriesMetric::kDtwNormalized
                         : SeriesMetric::kDtwRaw;
  }
  return CompareMultichannel(a, b, options).mean;
}

}  // namespace

std::string_view ToString(PairingLabel label) {
  switch (label) {
    case PairingLabel::kN1N2: return "N1-N2";
    case PairingLabel::kN1S1: return "N1-S1";
    case PairingLabel::kN1C1: return "N1-C1";
    case PairingLabel::kN2S2: return "N2-S2";
    case PairingLabel::kN2C2: return "N2-C2";
  }
  return "?";
}

std::string_view ToString(Metric metric) {
  switch (metric) {
    case Metric::kLpips: return "lpips";
    case Metric::kFid: return "fid";
    case Metric::kAuDtw: return "au_dtw";
    case Metric::kAuMape: return "au_mape";
    case Metric::kEmoDtw: return "emo_dtw";
    case Metric::kEmoMape: return "emo_mape";
  }
  return "?";
}

std::optional<PairingLabel> ParsePairingLabel(std::string_view text) {
  for (PairingLabel label : kAllPairingLabels) {
    const std::string_view name = ToString(label);
    if (text == name) return label;
    // Also accept the compact form "N1N2".
    if (text.size() == 4 && text.substr(0, 2) == name.substr(0, 2) &&
        text.substr(2) == name.substr(3)) {
      return label;
    }
  }
  return std::nullopt;
}

std::optional<Metric> ParseMetric(std::string_view text) {
  for (Metric metric : kAllMetrics) {
    if (ToString(metric) == text) return metric;
  }
  return std::nullopt;
}

std::vector<ComparisonJob> BuildPairings(const RecordingCatalog& catalog,
                                         const std::set<Metric>& metrics) {
  // (subject, task) -> recordings, already in key order.
  std::map<std::pair<std::string, Task>, std::vector<const RecordingRef*>>
      groups;
  for (const RecordingRef& ref : catalog.entries()) {
    groups[{ref.subject_id(), ref.task()}].push_back(&ref);
  }

  std::vector<ComparisonJob> jobs;
  for (const auto& [group, refs] : groups) {
    const auto& [subject, task] = group;
    std::map<Session, const RecordingRef*> normal;
    for (const RecordingRef* ref : refs) {
      if (ref->condition() == Condition::kNormal) normal[ref->session()] = ref;
    }
    for (Session s : kAllSessions) {
      if (!normal.contains(s)) {
        throw Error(ErrorCode::kMissingBaseline,
                    "subject " + subject + " has no normal recording in " +
                        std::string(ToString(s)) + " for task " +
                        std::string(ToString(task)));
      }
    }
    jobs.push_back({normal[Session::kS1]->key, normal[Session::kS2]->key,
                    PairingLabel::kN1N2, metrics});
    for (const RecordingRef* ref : refs) {
      const bool s1 = ref->session() == Session::kS1;
      PairingLabel label;
      if (ref->condition() == Condition::kSensor) {
        label = s1 ? PairingLabel::kN1S1 : PairingLabel::kN2S2;
      } else if (ref->condition() == Condition::kClean) {
        label = s1 ? PairingLabel::kN1C1 : PairingLabel::kN2C2;
      } else {
        continue;
      }
      jobs.push_back({normal[ref->session()]->key, ref->key, label, metrics});
    }
  }
  std::sort(jobs.begin(), jobs.end(),
            [](const ComparisonJob& a, const ComparisonJob& b) {
              return std::make_tuple(a.subject(), a.task(), a.label, a.take()) <
                     std::make_tuple(b.subject(), b.task(), b.label, b.take());
            });
  return jobs;
}

std::uint64_t JobSeed(std::uint64_t root_seed, const ComparisonJob& job) {
  const std::string label = job.subject() + "|" +
                            std::string(ToString(job.label)) + "|" +
                            std::string(ToString(job.task())) + "|" +
                            std::to_string(job.take());
  return DeriveSeed(root_seed, label);
}

double ScoreJob(const RecordingCatalog& catalog, const ComparisonJob& job,
                Metric metric, const PlanConfig& config, std::uint64_t seed) {
  const RecordingRef& left = RequireRef(catalog, job.left);
  const RecordingRef& right = RequireRef(catalog, job.right);
  switch (metric) {
    case Metric::kLpips: {
      const auto layers_left = FeatureLayers(left);
      const auto layers_right = FeatureLayers(right);
      const std::vector<FeatureStack> a = LoadFeatureSequence(layers_left);
      const std::vector<FeatureStack> b = LoadFeatureSequence(layers_right);
      LayerWeights weights;
      if (config.lpips_weights_dir) {
        std::vector<std::string> ids;
        for (const auto& [id, path] : layers_left) ids.push_back(id);
        weights = LoadLayerWeights(*config.lpips_weights_dir, ids);
      }
      return LpipsVideo(a, b, weights, config.lpips_pairing, seed).mean;
    }
    case Metric::kFid: {
      const FeatureMatrix a = ReadFeatureMatrix(RequireArtifact(left, "embedding"));
      const FeatureMatrix b =
          ReadFeatureMatrix(RequireArtifact(right, "embedding"));
      BatchPolicy policy;
      policy.batch = config.fid_batch;
      policy.seed = seed;
      policy.allow_fallback = config.fid_allow_fallback;
      return FidBetweenSets(a, b, policy).distance;
    }
    case Metric::kAuDtw: return SeriesScore(left, right, "au", false, config);
    case Metric::kAuMape: return SeriesScore(left, right, "au", true, config);
    case Metric::kEmoDtw:
      return SeriesScore(left, right, "emotion", false, config);
    case Metric::kEmoMape:
      return SeriesScore(left, right, "emotion", true, config);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric");
}

std::vector<ScoreRecord> RunPlan(const RecordingCatalog& catalog,
                                 const std::vector<ComparisonJob>& jobs,
                                 const PlanConfig& config, int threads) {
  std::vector<std::vector<ScoreRecord>> per_job(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const ComparisonJob& job = jobs[i];
      const std::uint64_t seed = JobSeed(config.seed, job);
      for (Metric metric : job.metrics) {
        ScoreRecord record;
        record.subject = job.subject();
        record.task = job.task();
        record.label = job.label;
        record.left = job.left;
        record.right = job.right;
        record.metric = metric;
        record.seed = seed;
        try {
          const double value = ScoreJob(catalog, job, metric, config, seed);
          if (!std::isfinite(value)) {
            throw Error(ErrorCode::kNonFiniteValue, "metric is not finite");
          }
          record.value = value;
        } catch (const std::exception& e) {
          record.error = e.what();
        }
        per_job[i].push_back(std::move(record));
      }
    }
  };
  const int workers = std::max(
      1, std::min<int>(threads, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  std::vector<ScoreRecord> records;
  for (auto& job_records : per_job) {
    for (auto& r : job_records) records.push_back(std::move(r));
  }
  return records;
}

std::string FormatScores(const std::vector<ScoreRecord>& records) {
  std::string out;
  for (const ScoreRecord& r : records) {
    nlohmann::ordered_json obj;
    obj["subject"] = r.subject;
    obj["task"] = ToString(r.task);
    obj["label"] = ToString(r.label);
    obj["left_session"] = ToString(r.left.session);
    obj["left_condition"] = ToString(r.left.condition);
    obj["left_take"] = r.left.take_index;
    obj["right_session"] = ToString(r.right.session);
    obj["right_condition"] = ToString(r.right.condition);
    obj["right_take"] = r.right.take_index;
    obj["metric"] = ToString(r.metric);
    if (r.value) {
      obj["value"] = *r.value;
    } else {
      obj["value"] = nullptr;
    }
    obj["seed"] = r.seed;
    obj["status"] = r.ok() ? "ok" : "failed";
    if (!r.ok()) obj["error"] = r.error;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<ScoreRecord> ParseScores(std::string_view text) {
  std::vector<ScoreRecord> records;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      ScoreRecord r;
      r.subject = obj.at("subject").get<std::string>();
      auto task = ParseTask(obj.at("task").get<std::string>());
      auto label = ParsePairingLabel(obj.at("label").get<std::string>());
      auto metric = ParseMetric(obj.at("metric").get<std::string>());
      auto ls = ParseSession(obj.at("left_session").get<std::string>());
      auto lc = ParseCondition(obj.at("left_condition").get<std::string>());
      auto rs = ParseSession(obj.at("right_session").get<std::string>());
      auto rc = ParseCondition(obj.at("right_condition").get<std::string>());
      if (!task || !label || !metric || !ls || !lc || !rs || !rc) {
        throw Error(ErrorCode::kParseError, "unknown enum value");
      }
      r.task = *task;
      r.label = *label;
      r.metric = *metric;
      r.left = {r.subject, *ls, *lc, *task, obj.at("left_take").get<int>()};
      r.right = {r.subject, *rs, *rc, *task, obj.at("right_take").get<int>()};
      if (!obj.at("value").is_null()) r.value = obj.at("value").get<double>();
      r.seed = obj.at("seed").get<std::uint64_t>();
      if (auto it = obj.find("error"); it != obj.end()) {
        r.error = it->get<std::string>();
      }
      records.push_back(std::move(r));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError,
                  "scores line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "scores line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

const CellStats* ResultTable::Find(PairingLabel label, Task task,
                                   Metric metric) const {
  auto it = cells.find({label, task, metric});
  return it == cells.end() ? nullptr : &it->second;
}

std::set<Metric> ResultTable::metrics() const {
  std::set<Metric> out;
  for (const auto& [key, stats] : cells) out.insert(std::get<2>(key));
  return out;
}

ResultTable Aggregate(const std::vector<ScoreRecord>& records,
                      TakePolicy take_policy) {
  // cell -> subject -> take -> value. Ordered maps make the fold independent
  // of input order.
  std::map<ResultTable::CellKey,
           std::map<std::string, std::map<int, double>>>
      grouped;
  for (const ScoreRecord& r : records) {
    if (!r.ok()) continue;
    grouped[{r.label, r.task, r.metric}][r.subject][r.right.take_index] =
        *r.value;
  }
  ResultTable table;
  for (const auto& [cell, subjects] : grouped) {
    std::vector<double> per_subject;
    for (const auto& [subject, takes] : subjects) {
      if (take_policy == TakePolicy::kFirst) {
        per_subject.push_back(takes.begin()->second);
        continue;
      }
      double sum = 0.0;
      for (const auto& [take, value] : takes) sum += value;
      per_subject.push_back(sum / static_cast<double>(takes.size()));
    }
    const MeanStd stats = ComputeMeanStd(per_subject);
    table.cells[cell] = {stats.mean, stats.std, stats.n};
  }
  return table;
}

std::string FormatNumber(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  std::string out = buf;
  if (std::isfinite(value) &&
      out.find_first_of(".eE") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::string RenderTable(const ResultTable& table, TableFormat format) {
  const bool markdown = format == TableFormat::kMarkdown;
  std::vector<std::pair<Metric, Task>> columns;
  for (Metric metric : table.metrics()) {
    for (Task task : kReportTaskOrder) columns.emplace_back(metric, task);
  }
  std::int64_t max_n = 0;
  for (const auto& [key, stats] : table.cells) max_n = std::max(max_n, stats.n);

  auto row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (markdown) {
        line += (i == 0 ? "| " : " | ") + cells[i];
      } else {
        line += (i == 0 ? "" : ",") + cells[i];
      }
    }
    return line + (markdown ? " |\n" : "\n");
  };

  std::vector<std::string> header = {"pairing"};
  for (const auto& [metric, task] : columns) {
    header.push_back(std::string(ToString(metric)) +
                     (markdown ? " " : "_") + std::string(ToString(task)));
  }
  std::string out = row(header);
  if (markdown) {
    std::vector<std::string> rule = {"---"};
    for (std::size_t i = 0; i < columns.size(); ++i) rule.push_back("---:");
    out += row(rule);
  }
  if (table.empty()) return out;

  for (PairingLabel label : kAllPairingLabels) {
    std::vector<std::string> cells = {std::string(ToString(label))};
    for (const auto& [metric, task] : columns) {
      const CellStats* stats = table.Find(label, task, metric);
      if (stats == nullptr || stats->n == 0) {
        cells.push_back("-");
        continue;
      }
      std::string cell =
          FormatNumber(stats->mean) + "±" + FormatNumber(stats->std);
      if (stats->n < max_n) cell += " (n=" + std::to_string(stats->n) + ")";
      cells.push_back(std::move(cell));
    }
    out += row(cells);
  }
  return out;
}

}  // namespace restoreval
