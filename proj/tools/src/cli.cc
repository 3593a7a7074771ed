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

#include "restoreval/cli.h"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "restoreval/atomic_file.h"
#include "restoreval/catalog.h"
#include "restoreval/error.h"
#include "restoreval/frechet.h"
#include "restoreval/series_io.h"
#include "restoreval/series_metrics.h"
#include "restoreval/synth.h"
#include "restoreval/tensor_io.h"

namespace restoreval::cli {
namespace {

constexpr char kSynopsis[] =
    "usage: restoreval <command> [options]\n"
    "\n"
    "commands:\n"
    "  validate --manifest FILE             check a recording manifest\n"
    "  fid      --a FILE --b FILE           Frechet distance of two embeddings\n"
    "  lpips    --a FILE... --b FILE...     LPIPS between feature sequences\n"
    "  dtw      --a CSV --b CSV             DTW distance per channel\n"
    "  mape     --a CSV --b CSV             shift-searched MAPE per channel\n"
    "  plan     --manifest FILE [--out DIR] score every comparison job\n"
    "  report   --manifest FILE [--out DIR] score and tabulate\n"
    "  synth    [--out DIR] [--subjects N]  write a synthetic fixture bundle\n"
    "\n"
    "Run 'restoreval <command> --help' for options. Exit codes: 0 ok,\n"
    "1 metric or validation failure, 2 usage error.\n";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string_view ToString(FramePairing pairing) {
  return pairing == FramePairing::kAllPairs ? "all-pairs" : "index";
}
std::string_view ToString(DtwNormalization n) {
  return n == DtwNormalization::kRaw ? "raw" : "path-length";
}
std::string_view ToString(TakePolicy p) {
  return p == TakePolicy::kFirst ? "first" : "average";
}

FramePairing ParsePairingMode(const std::string& text) {
  if (text == "index") return FramePairing::kIndexAligned;
  if (text == "all-pairs") return FramePairing::kAllPairs;
  throw UsageError("lpips pairing must be 'index' or 'all-pairs': " + text);
}
DtwNormalization ParseDtwNormalization(const std::string& text) {
  if (text == "path-length") return DtwNormalization::kPathLength;
  if (text == "raw") return DtwNormalization::kRaw;
  throw UsageError("dtw normalization must be 'path-length' or 'raw': " + text);
}
TakePolicy ParseTakePolicy(const std::string& text) {
  if (text == "average") return TakePolicy::kAverage;
  if (text == "first") return TakePolicy::kFirst;
  throw UsageError("take policy must be 'average' or 'first': " + text);
}

std::set<std::string> SplitChannels(const std::string& text) {
  std::set<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::string JoinChannels(const std::set<std::string>& channels) {
  std::string out;
  for (const std::string& c : channels) out += (out.empty() ? "" : ",") + c;
  return out;
}

// Flags shared by every command. Each one overrides the config file only
// when given on the command line.
struct CommonFlags {
  std::string config_path;
  std::string manifest, out, weights;
  std::uint64_t seed = 0;
  std::int64_t fid_batch = 0;
  double shift_window = 0.0, fps = 0.0;
  std::string exclude, lpips_pairing, dtw_norm, take_policy;

  CLI::Option* o_manifest = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_weights = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_fid_batch = nullptr;
  CLI::Option* o_shift = nullptr;
  CLI::Option* o_fps = nullptr;
  CLI::Option* o_exclude = nullptr;
  CLI::Option* o_pairing = nullptr;
  CLI::Option* o_dtw = nullptr;
  CLI::Option* o_take = nullptr;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    o_manifest = app->add_option("--manifest", manifest, "manifest.jsonl");
    o_out = app->add_option("--out", out, "output directory");
    o_weights =
        app->add_option("--lpips-weights", weights, "per-layer weight dir");
    o_seed = app->add_option("--seed", seed, "root seed");
    o_fid_batch = app->add_option("--fid-batch", fid_batch, "FID batch size");
    o_shift = app->add_option("--shift-window", shift_window,
                              "MAPE shift window in seconds");
    o_fps = app->add_option("--fps", fps, "default frame rate");
    o_exclude = app->add_option("--exclude", exclude,
                                "comma-separated channels to skip");
    o_pairing = app->add_option("--lpips-pairing", lpips_pairing,
                                "index | all-pairs");
    o_dtw = app->add_option("--dtw-norm", dtw_norm, "path-length | raw");
    o_take = app->add_option("--take-policy", take_policy, "average | first");
  }

  RunConfig Resolve() const {
    RunConfig config;
    if (!config_path.empty()) {
      std::string text;
      try {
        text = ReadFileToString(config_path);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      try {
        ApplyConfigJson(text, config);
      } catch (const Error& e) {
        throw UsageError(std::string("config ") + config_path + ": " +
                         e.what());
      }
    }
    if (o_manifest->count()) config.manifest = manifest;
    if (o_out->count()) config.output_dir = out;
    if (o_weights->count()) config.lpips_weights_dir = weights;
    if (o_seed->count()) config.seed = seed;
    if (o_fid_batch->count()) config.fid_batch = fid_batch;
    if (o_shift->count()) config.shift_window_seconds = shift_window;
    if (o_fps->count()) config.fps = fps;
    if (o_exclude->count()) config.exclude_channels = SplitChannels(exclude);
    if (o_pairing->count()) config.lpips_pairing = ParsePairingMode(lpips_pairing);
    if (o_dtw->count()) config.dtw_normalization = ParseDtwNormalization(dtw_norm);
    if (o_take->count()) config.take_policy = ParseTakePolicy(take_policy);
    if (config.fid_batch < 2) throw UsageError("fid_batch must be at least 2");
    if (!(config.fps > 0.0)) throw UsageError("fps must be positive");
    if (!(config.shift_window_seconds > 0.0)) {
      throw UsageError("shift_window_seconds must be positive");
    }
    return config;
  }
};

const std::filesystem::path& RequireManifest(const RunConfig& config) {
  if (!config.manifest) throw UsageError("--manifest is required");
  return *config.manifest;
}

std::filesystem::path OutputDir(const RunConfig& config) {
  if (config.output_dir) return *config.output_dir;
  const std::filesystem::path parent = RequireManifest(config).parent_path();
  return parent.empty() ? std::filesystem::path(".") : parent;
}

std::vector<std::pair<std::string, std::filesystem::path>> LayerFiles(
    const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const std::string& p : paths) {
    const std::filesystem::path path(p);
    out.emplace_back(path.stem().string(), path);
  }
  return out;
}

struct PlanOutcome {
  std::vector<ScoreRecord> records;
  std::int64_t failed = 0;
};

PlanOutcome ExecutePlan(const RunConfig& config,
                        const std::filesystem::path& out_dir) {
  const RecordingCatalog catalog = LoadManifest(RequireManifest(config));
  const std::vector<ComparisonJob> jobs = BuildPairings(catalog);
  PlanOutcome outcome;
  outcome.records = RunPlan(catalog, jobs, config.ToPlanConfig(),
                            ThreadsFromEnvironment());
  for (const ScoreRecord& r : outcome.records) outcome.failed += r.ok() ? 0 : 1;
  std::filesystem::create_directories(out_dir);
  WriteFileAtomically(out_dir / "scores.jsonl", FormatScores(outcome.records));
  return outcome;
}

void ReportFailures(const std::vector<ScoreRecord>& records, std::ostream& err) {
  for (const ScoreRecord& r : records) {
    if (r.ok()) continue;
    err << "failed: " << ToString(r.left) << " vs " << ToString(r.right) << " "
        << ToString(r.metric) << ": " << r.error << "\n";
  }
}

ResultTable SubTable(const ResultTable& table, std::set<Metric> metrics) {
  ResultTable out;
  out.metadata = table.metadata;
  for (const auto& [key, stats] : table.cells) {
    if (metrics.contains(std::get<2>(key))) out.cells.emplace(key, stats);
  }
  return out;
}

// --- subcommands -----------------------------------------------------------

int CmdValidate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const RecordingCatalog catalog = ReadManifest(RequireManifest(config));
  if (!catalog.valid()) {
    for (const std::string& v : catalog.violations()) err << v << "\n";
    out << "invalid: " << catalog.violations().size() << " violation(s)\n";
    return kExitFailure;
  }
  out << "ok: " << catalog.entries().size() << " recordings, "
      << catalog.Subjects().size() << " subjects\n";
  return kExitOk;
}

int CmdFid(const RunConfig& config, const std::string& a,
           const std::string& b, std::ostream& out) {
  BatchPolicy policy;
  policy.batch = config.fid_batch;
  policy.seed = config.seed;
  const FidResult result =
      FidBetweenSets(ReadFeatureMatrix(a), ReadFeatureMatrix(b), policy);
  out << FormatNumber(result.distance) << "\n";
  return kExitOk;
}

int CmdLpips(const RunConfig& config, const std::vector<std::string>& a,
             const std::vector<std::string>& b, std::ostream& out) {
  const auto layers_a = LayerFiles(a);
  const std::vector<FeatureStack> seq_a = LoadFeatureSequence(layers_a);
  const std::vector<FeatureStack> seq_b = LoadFeatureSequence(LayerFiles(b));
  LayerWeights weights;
  if (config.lpips_weights_dir) {
    std::vector<std::string> ids;
    for (const auto& [id, path] : layers_a) ids.push_back(id);
    weights = LoadLayerWeights(*config.lpips_weights_dir, ids);
  }
  const LpipsVideoResult result =
      LpipsVideo(seq_a, seq_b, weights, config.lpips_pairing, config.seed);
  out << FormatNumber(result.mean) << "\n";
  return kExitOk;
}

int CmdSeries(const RunConfig& config, bool mape, const std::string& a_path,
              const std::string& b_path, const std::string& channel,
              std::ostream& out) {
  const TimeSeries a = ReadSeriesCsv(a_path, config.fps);
  const TimeSeries b = ReadSeriesCsv(b_path, config.fps);
  if (!channel.empty()) {
    const auto ia = a.ChannelIndex(channel);
    const auto ib = b.ChannelIndex(channel);
    if (!ia || !ib) {
      throw Error(ErrorCode::kChannelMismatch,
                  "channel '" + channel + "' missing from an input");
    }
    const std::vector<double> x = a.Channel(*ia), y = b.Channel(*ib);
    if (mape) {
      const ShiftedMapeResult r =
          MapeBestShift(x, y, config.shift_window_seconds, a.fps());
      out << FormatNumber(r.best_score) << "\t" << r.best_shift_frames << "\n";
    } else {
      const DtwResult r = Dtw(x, y);
      out << FormatNumber(config.dtw_normalization == DtwNormalization::kRaw
                              ? r.total_cost
                              : r.normalized_cost)
          << "\n";
    }
    return kExitOk;
  }
  MultichannelOptions options;
  options.metric = mape ? SeriesMetric::kMapeShift
                   : config.dtw_normalization == DtwNormalization::kRaw
                       ? SeriesMetric::kDtwRaw
                       : SeriesMetric::kDtwNormalized;
  options.exclude = config.exclude_channels;
  options.window_seconds = config.shift_window_seconds;
  const MultichannelResult r = CompareMultichannel(a, b, options);
  for (std::size_t i = 0; i < r.channels.size(); ++i) {
    out << r.channels[i] << "\t" << FormatNumber(r.scores[i]) << "\n";
  }
  out << "mean\t" << FormatNumber(r.mean) << "\n";
  return kExitOk;
}

int CmdPlan(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = OutputDir(config);
  const PlanOutcome outcome = ExecutePlan(config, dir);
  ReportFailures(outcome.records, err);
  out << outcome.records.size() << " scores (" << outcome.failed
      << " failed) -> " << (dir / "scores.jsonl").string() << "\n";
  return outcome.failed == 0 ? kExitOk : kExitFailure;
}

int CmdReport(const RunConfig& config, const std::string& scores_path,
              std::ostream& out, std::ostream& err) {
  std::vector<ScoreRecord> records;
  std::filesystem::path dir;
  if (!scores_path.empty()) {
    records = ParseScores(ReadFileToString(scores_path));
    dir = config.output_dir ? *config.output_dir
                            : std::filesystem::path(scores_path).parent_path();
    if (dir.empty()) dir = ".";
  } else {
    dir = OutputDir(config);
    records = ExecutePlan(config, dir).records;
  }
  std::int64_t failed = 0;
  for (const ScoreRecord& r : records) failed += r.ok() ? 0 : 1;
  ReportFailures(records, err);

  ResultTable table = Aggregate(records, config.take_policy);
  table.metadata = config.Echo();
  std::filesystem::create_directories(dir);
  WriteFileAtomically(dir / "report.csv", RenderCsvReport(table, table.metadata));
  WriteFileAtomically(dir / "report.md",
                      RenderMarkdownReport(table, table.metadata, failed));
  out << "report -> " << (dir / "report.md").string() << ", "
      << (dir / "report.csv").string() << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

// ---------------------------------------------------------------------------

PlanConfig RunConfig::ToPlanConfig() const {
  PlanConfig plan;
  plan.seed = seed;
  plan.fid_batch = fid_batch;
  plan.shift_window_seconds = shift_window_seconds;
  plan.fps = fps;
  plan.exclude_channels = exclude_channels;
  plan.lpips_pairing = lpips_pairing;
  plan.dtw_normalization = dtw_normalization;
  plan.lpips_weights_dir = lpips_weights_dir;
  return plan;
}

std::map<std::string, std::string> RunConfig::Echo() const {
  return {
      {"dtw_normalization", std::string(ToString(dtw_normalization))},
      {"exclude_channels", JoinChannels(exclude_channels)},
      {"fid_batch", std::to_string(fid_batch)},
      {"fid_sampling", "one seeded subsample per side"},
      {"fps", FormatNumber(fps)},
      {"lpips_pairing", std::string(ToString(lpips_pairing))},
      {"lpips_weights",
       lpips_weights_dir ? lpips_weights_dir->generic_string() : "uniform"},
      {"manifest", manifest ? manifest->generic_string() : ""},
      {"mape_epsilon", FormatNumber(kMapeEpsilon)},
      {"seed", std::to_string(seed)},
      {"shift_window_seconds", FormatNumber(shift_window_seconds)},
      {"take_policy", std::string(ToString(take_policy))},
  };
}

void ApplyConfigJson(const std::string& json_text, RunConfig& config) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
  if (!obj.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  }
  try {
    for (const auto& [key, value] : obj.items()) {
      if (key == "manifest") {
        config.manifest = value.get<std::string>();
      } else if (key == "output_dir") {
        config.output_dir = value.get<std::string>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "fid_batch") {
        config.fid_batch = value.get<std::int64_t>();
      } else if (key == "shift_window_seconds") {
        config.shift_window_seconds = value.get<double>();
      } else if (key == "fps") {
        config.fps = value.get<double>();
      } else if (key == "exclude_channels") {
        config.exclude_channels = value.get<std::set<std::string>>();
      } else if (key == "lpips_pairing") {
        config.lpips_pairing = ParsePairingMode(value.get<std::string>());
      } else if (key == "dtw_normalization") {
        config.dtw_normalization =
            ParseDtwNormalization(value.get<std::string>());
      } else if (key == "take_policy") {
        config.take_policy = ParseTakePolicy(value.get<std::string>());
      } else if (key == "lpips_weights") {
        config.lpips_weights_dir = value.get<std::string>();
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown key '" + key + "'");
      }
    }
  } catch (const UsageError& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
}

int ThreadsFromEnvironment() {
  if (const char* env = std::getenv("RESTOREVAL_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string RenderMarkdownReport(const ResultTable& table,
                                 const std::map<std::string, std::string>& echo,
                                 std::int64_t failed_records) {
  std::string md = "# restoreval report\n\n## Configuration\n\n";
  for (const auto& [key, value] : echo) {
    md += "- " + key + ": `" + value + "`\n";
  }
  const std::pair<const char*, std::set<Metric>> sections[] = {
      {"Perceptual metrics", {Metric::kLpips, Metric::kFid}},
      {"Action units", {Metric::kAuDtw, Metric::kAuMape}},
      {"Emotions", {Metric::kEmoDtw, Metric::kEmoMape}},
  };
  for (const auto& [title, metrics] : sections) {
    md += "\n## " + std::string(title) + "\n\n";
    md += RenderTable(SubTable(table, metrics), TableFormat::kMarkdown);
  }
  md += "\nCells are mean±std across subjects; (n=k) marks cells with fewer "
        "subjects.\n";
  if (failed_records > 0) {
    md += "\nFailed score records: " + std::to_string(failed_records) + "\n";
  }
  return md;
}

std::string RenderCsvReport(const ResultTable& table,
                            const std::map<std::string, std::string>& echo) {
  std::string csv;
  for (const auto& [key, value] : echo) csv += "# " + key + "=" + value + "\n";
  return csv + RenderTable(table, TableFormat::kCsv);
}

int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Evaluation harness for facial-video restoration", "restoreval"};
  app.require_subcommand(1, 1);

  std::string a, b, channel, scores;
  std::vector<std::string> a_list, b_list;
  SynthBundleOptions synth;
  double camera_noise = synth.camera_noise;

  auto* validate = app.add_subcommand("validate", "check a manifest");
  auto* fid = app.add_subcommand("fid", "Frechet distance of two embeddings");
  auto* lpips = app.add_subcommand("lpips", "LPIPS of two feature sequences");
  auto* dtw = app.add_subcommand("dtw", "DTW distance of two series");
  auto* mape = app.add_subcommand("mape", "shift-searched MAPE of two series");
  auto* plan = app.add_subcommand("plan", "score every comparison job");
  auto* report = app.add_subcommand("report", "score and render tables");
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic bundle");

  // Every subcommand accepts the shared flags so one config serves all.
  std::vector<std::unique_ptr<CommonFlags>> per_command;
  for (CLI::App* sub : {validate, fid, lpips, dtw, mape, plan, report,
                        synth_cmd}) {
    per_command.push_back(std::make_unique<CommonFlags>());
    per_command.back()->Register(sub);
  }
  fid->add_option("--a", a, "embedding A (N×D FFR1)")->required();
  fid->add_option("--b", b, "embedding B (N×D FFR1)")->required();
  lpips->add_option("--a", a_list, "per-layer T×C×H×W FFR1 files for A")
      ->required();
  lpips->add_option("--b", b_list, "per-layer T×C×H×W FFR1 files for B")
      ->required();
  for (CLI::App* sub : {dtw, mape}) {
    sub->add_option("--a", a, "reference series CSV")->required();
    sub->add_option("--b", b, "other series CSV")->required();
    sub->add_option("--channel", channel, "score a single channel");
  }
  report->add_option("--scores", scores, "aggregate an existing scores.jsonl");
  synth_cmd->add_option("--subjects", synth.subjects)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--frames", synth.frames)->check(CLI::Range(2, 1 << 20));
  synth_cmd->add_option("--takes", synth.sensor_takes)
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", synth.size, "frame side, multiple of 8")
      ->check(CLI::Range(8, 1024));
  synth_cmd->add_option("--camera-noise", camera_noise)
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_flag("--write-frames", synth.write_frames,
                      "also store raw frames");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = app.get_subcommands().empty()
                                 ? &app
                                 : app.get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "restoreval: " << e.what() << "\n\n" << kSynopsis;
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  std::size_t index = 0;
  for (CLI::App* sub : {validate, fid, lpips, dtw, mape, plan, report,
                        synth_cmd}) {
    if (sub == cmd) break;
    ++index;
  }
  const CommonFlags& common = *per_command[index];

  try {
    const RunConfig config = common.Resolve();
    if (cmd == validate) return CmdValidate(config, out, err);
    if (cmd == fid) return CmdFid(config, a, b, out);
    if (cmd == lpips) return CmdLpips(config, a_list, b_list, out);
    if (cmd == dtw) return CmdSeries(config, false, a, b, channel, out);
    if (cmd == mape) return CmdSeries(config, true, a, b, channel, out);
    if (cmd == plan) return CmdPlan(config, out, err);
    if (cmd == report) return CmdReport(config, scores, out, err);
    synth.seed = config.seed;
    synth.fps = config.fps;
    synth.camera_noise = camera_noise;
    const std::filesystem::path dir =
        config.output_dir.value_or(std::filesystem::path("out"));
    const SynthBundle bundle = WriteSynthBundle(dir, synth);
    out << bundle.recordings << " recordings, " << bundle.files
        << " artifacts -> " << bundle.manifest.string() << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    err << "restoreval " << cmd->get_name() << ": " << e.what() << "\n\n"
        << kSynopsis;
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "restoreval " << cmd->get_name() << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace restoreval::cli
