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

#include "restoreval/types.h"

#include <cmath>
#include <set>

#include "restoreval/error.h"

namespace restoreval {

std::string_view ToString(Session session) {
  return session == Session::kS1 ? "S1" : "S2";
}

std::string_view ToString(Condition condition) {
  switch (condition) {
    case Condition::kNormal: return "normal";
    case Condition::kSensor: return "sensor";
    case Condition::kClean: return "clean";
  }
  return "?";
}

std::string_view ToString(Task task) {
  switch (task) {
    case Task::kSchaede: return "schaede";
    case Task::kSentence: return "sentence";
    case Task::kEmotion: return "emotion";
  }
  return "?";
}

std::optional<Session> ParseSession(std::string_view text) {
  if (text == "S1") return Session::kS1;
  if (text == "S2") return Session::kS2;
  return std::nullopt;
}

std::optional<Condition> ParseCondition(std::string_view text) {
  for (Condition c : kAllConditions) {
    if (ToString(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<Task> ParseTask(std::string_view text) {
  for (Task t : kAllTasks) {
    if (ToString(t) == text) return t;
  }
  return std::nullopt;
}

std::string ToString(const RecordingKey& key) {
  return key.subject_id + "/" + std::string(ToString(key.session)) + "/" +
         std::string(ToString(key.condition)) + "/" +
         std::string(ToString(key.task)) + "/take" +
         std::to_string(key.take_index);
}

FeatureMatrix::FeatureMatrix(std::int64_t rows, std::int64_t dim,
                             std::string source)
    : rows(rows),
      dim(dim),
      values(static_cast<std::size_t>(rows * dim), 0.0f),
      source(std::move(source)) {}

void ValidateStack(const FeatureStack& stack) {
  for (const FeatureLayer& layer : stack.layers) {
    if (layer.channels < 1 || layer.height < 1 || layer.width < 1 ||
        static_cast<std::int64_t>(layer.values.size()) !=
            layer.channels * layer.height * layer.width) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer '" + layer.id + "' tensor does not match its dims");
    }
    for (float v : layer.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "layer '" + layer.id + "' contains a non-finite value");
      }
    }
  }
}

TimeSeries::TimeSeries(double fps, std::vector<std::string> channel_names,
                       std::vector<double> values)
    : fps_(fps),
      channel_names_(std::move(channel_names)),
      values_(std::move(values)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
    throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  }
  if (channel_names_.empty()) {
    throw Error(ErrorCode::kHeaderMismatch, "series has no channels");
  }
  std::set<std::string> unique(channel_names_.begin(), channel_names_.end());
  if (unique.size() != channel_names_.size()) {
    throw Error(ErrorCode::kHeaderMismatch, "duplicate channel names");
  }
  if (values_.size() % channel_names_.size() != 0) {
    throw Error(ErrorCode::kRaggedRow,
                "value count is not a multiple of the channel count");
  }
  frames_ = static_cast<std::int64_t>(values_.size() / channel_names_.size());
  if (frames_ < 1) {
    throw Error(ErrorCode::kEmptySeries, "series has no frames");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "series contains NaN or infinite values");
    }
  }
}

std::vector<double> TimeSeries::Channel(std::int64_t c) const {
  std::vector<double> out(static_cast<std::size_t>(frames_));
  for (std::int64_t t = 0; t < frames_; ++t) out[t] = at(t, c);
  return out;
}

std::optional<std::int64_t> TimeSeries::ChannelIndex(
    std::string_view name) const {
  for (std::size_t i = 0; i < channel_names_.size(); ++i) {
    if (channel_names_[i] == name) return static_cast<std::int64_t>(i);
  }
  return std::nullopt;
}

}  // namespace restoreval
