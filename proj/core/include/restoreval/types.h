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

#ifndef RESTOREVAL_TYPES_H_
#define RESTOREVAL_TYPES_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace restoreval {

enum class Session { kS1 = 1, kS2 = 2 };
enum class Condition { kNormal, kSensor, kClean };
enum class Task { kSchaede, kSentence, kEmotion };

inline constexpr Session kAllSessions[] = {Session::kS1, Session::kS2};
inline constexpr Condition kAllConditions[] = {
    Condition::kNormal, Condition::kSensor, Condition::kClean};
inline constexpr Task kAllTasks[] = {Task::kSchaede, Task::kSentence,
                                     Task::kEmotion};

std::string_view ToString(Session session);
std::string_view ToString(Condition condition);
std::string_view ToString(Task task);

// Parsers return nullopt for anything outside the closed enum.
std::optional<Session> ParseSession(std::string_view text);
std::optional<Condition> ParseCondition(std::string_view text);
std::optional<Task> ParseTask(std::string_view text);

// Identity of one recording: (subject, session, condition, task, take).
struct RecordingKey {
  std::string subject_id;
  Session session = Session::kS1;
  Condition condition = Condition::kNormal;
  Task task = Task::kSchaede;
  int take_index = 1;

  auto operator<=>(const RecordingKey&) const = default;
  bool operator==(const RecordingKey&) const = default;
};

std::string ToString(const RecordingKey& key);

struct RecordingRef {
  RecordingKey key;
  // Artifact kind ("embedding", "features:<layer>", "au", "emotion",
  // "frames") to absolute path.
  std::map<std::string, std::filesystem::path> artifacts;
  std::optional<double> fps;

  const std::string& subject_id() const { return key.subject_id; }
  Session session() const { return key.session; }
  Condition condition() const { return key.condition; }
  Task task() const { return key.task; }
  int take_index() const { return key.take_index; }
};

// N×d frame-embedding matrix, row-major, one row per frame.
struct FeatureMatrix {
  std::int64_t rows = 0;
  std::int64_t dim = 0;
  std::vector<float> values;
  std::string source;

  FeatureMatrix() = default;
  FeatureMatrix(std::int64_t rows, std::int64_t dim, std::string source = {});

  float& at(std::int64_t r, std::int64_t c) { return values[r * dim + c]; }
  float at(std::int64_t r, std::int64_t c) const { return values[r * dim + c]; }
  std::span<const float> row(std::int64_t r) const {
    return {values.data() + r * dim, static_cast<std::size_t>(dim)};
  }
  bool operator==(const FeatureMatrix& other) const {
    return rows == other.rows && dim == other.dim && values == other.values;
  }
};

// One layer of activations, C×H×W row-major.
struct FeatureLayer {
  std::string id;
  std::int64_t channels = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> values;

  std::int64_t locations() const { return height * width; }
  float at(std::int64_t c, std::int64_t h, std::int64_t w) const {
    return values[(c * height + h) * width + w];
  }
  float& at(std::int64_t c, std::int64_t h, std::int64_t w) {
    return values[(c * height + h) * width + w];
  }
  bool operator==(const FeatureLayer&) const = default;
};

struct FeatureStack {
  std::vector<FeatureLayer> layers;
  std::int64_t frame_index = 0;

  bool operator==(const FeatureStack&) const = default;
};

// Checks declared dims against tensor sizes and finiteness; throws Error.
void ValidateStack(const FeatureStack& stack);

// T×C channel matrix sampled at a fixed rate.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double fps, std::vector<std::string> channel_names,
             std::vector<double> values);

  double fps() const { return fps_; }
  std::int64_t frames() const { return frames_; }
  std::int64_t channels() const {
    return static_cast<std::int64_t>(channel_names_.size());
  }
  const std::vector<std::string>& channel_names() const {
    return channel_names_;
  }
  const std::vector<double>& values() const { return values_; }

  double at(std::int64_t t, std::int64_t c) const {
    return values_[t * channels() + c];
  }
  std::vector<double> Channel(std::int64_t c) const;
  std::optional<std::int64_t> ChannelIndex(std::string_view name) const;

  bool operator==(const TimeSeries&) const = default;

 private:
  double fps_ = 30.0;
  std::vector<std::string> channel_names_;
  std::vector<double> values_;
  std::int64_t frames_ = 0;
};

}  // namespace restoreval

#endif  // RESTOREVAL_TYPES_H_
