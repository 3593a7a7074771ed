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

#include "restoreval/catalog.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "restoreval/atomic_file.h"
#include "restoreval/error.h"

namespace restoreval {
namespace {

using nlohmann::json;

std::string LinePrefix(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

const json& RequireField(const json& obj, const char* name,
                         std::size_t line_no) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw Error(ErrorCode::kParseError,
                LinePrefix(line_no) + "missing field '" + name + "'");
  }
  return *it;
}

std::string RequireString(const json& obj, const char* name,
                          std::size_t line_no) {
  const json& v = RequireField(obj, name, line_no);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError,
                LinePrefix(line_no) + "field '" + name + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

RecordingCatalog::RecordingCatalog(std::filesystem::path root,
                                   std::vector<RecordingRef> entries)
    : root_(std::move(root)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const RecordingRef& a, const RecordingRef& b) {
              return a.key < b.key;
            });
}

std::vector<std::string> RecordingCatalog::Subjects() const {
  std::set<std::string> subjects;
  for (const RecordingRef& ref : entries_) subjects.insert(ref.subject_id());
  return {subjects.begin(), subjects.end()};
}

const RecordingRef* RecordingCatalog::Find(const RecordingKey& key) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), key,
      [](const RecordingRef& ref, const RecordingKey& k) { return ref.key < k; });
  if (it == entries_.end() || it->key != key) return nullptr;
  return &*it;
}

void RecordingCatalog::Validate() {
  violations_ = parse_violations_;
  auto AddViolation = [this](std::string v) {
    violations_.push_back(std::move(v));
  };
  std::map<std::filesystem::path, std::string> seen_paths;
  std::map<std::tuple<std::string, Session, Task>, int> normals;
  for (const RecordingRef& ref : entries_) {
    const std::string name = ToString(ref.key);
    if (ref.take_index() < 1) {
      AddViolation(name + ": take index must be >= 1");
    }
    if (ref.fps && !(*ref.fps > 0.0)) {
      AddViolation(name + ": fps must be positive");
    }
    for (const auto& [kind, path] : ref.artifacts) {
      if (!std::filesystem::exists(path)) {
        AddViolation(name + ": " + kind + " artifact missing at " +
                     path.string());
      }
      auto [it, inserted] =
          seen_paths.emplace(path.lexically_normal(), name + "#" + kind);
      if (!inserted) {
        AddViolation(name + ": path " + path.string() +
                     " already used by " + it->second);
      }
    }
    if (ref.condition() == Condition::kNormal) {
      int& count = normals[{ref.subject_id(), ref.session(), ref.task()}];
      if (++count == 2) {
        AddViolation(ref.subject_id() + "/" +
                     std::string(ToString(ref.session())) + "/" +
                     std::string(ToString(ref.task())) +
                     ": more than one normal recording");
      }
    }
    if (ref.condition() == Condition::kClean) {
      RecordingKey sibling = ref.key;
      sibling.condition = Condition::kSensor;
      if (Find(sibling) == nullptr) {
        AddViolation(name + ": no sensor recording with the same take");
      }
    }
  }
}

RecordingCatalog ParseManifest(std::string_view text,
                               const std::filesystem::path& root) {
  std::map<RecordingKey, RecordingRef> refs;
  std::vector<std::string> violations;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, LinePrefix(line_no) + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kParseError,
                  LinePrefix(line_no) + "expected a JSON object");
    }
    const std::string subject = RequireString(obj, "subject", line_no);
    const std::string session = RequireString(obj, "session", line_no);
    const std::string condition = RequireString(obj, "condition", line_no);
    const std::string task = RequireString(obj, "task", line_no);
    const std::string kind = RequireString(obj, "kind", line_no);
    const std::string path = RequireString(obj, "path", line_no);
    const json& take = RequireField(obj, "take", line_no);
    if (!take.is_number_integer()) {
      throw Error(ErrorCode::kParseError,
                  LinePrefix(line_no) + "field 'take' must be an integer");
    }
    std::optional<double> fps;
    if (auto it = obj.find("fps"); it != obj.end() && !it->is_null()) {
      if (!it->is_number()) {
        throw Error(ErrorCode::kParseError,
                    LinePrefix(line_no) + "field 'fps' must be a number");
      }
      fps = it->get<double>();
    }

    const auto session_value = ParseSession(session);
    const auto condition_value = ParseCondition(condition);
    const auto task_value = ParseTask(task);
    bool ok = true;
    if (subject.empty()) {
      violations.push_back(LinePrefix(line_no) + "empty subject id");
      ok = false;
    }
    if (!session_value) {
      violations.push_back(LinePrefix(line_no) + "unknown session '" +
                           session + "'");
      ok = false;
    }
    if (!condition_value) {
      violations.push_back(LinePrefix(line_no) + "unknown condition '" +
                           condition + "'");
      ok = false;
    }
    if (!task_value) {
      violations.push_back(LinePrefix(line_no) + "unknown task '" + task +
                           "'");
      ok = false;
    }
    if (kind.empty()) {
      violations.push_back(LinePrefix(line_no) + "empty artifact kind");
      ok = false;
    }
    if (!ok) continue;

    RecordingKey key{subject, *session_value, *condition_value, *task_value,
                     take.get<int>()};
    RecordingRef& ref = refs[key];
    ref.key = key;
    std::filesystem::path resolved = path;
    if (resolved.is_relative()) resolved = root / resolved;
    if (!ref.artifacts.emplace(kind, resolved).second) {
      violations.push_back(LinePrefix(line_no) + ToString(key) +
                           ": duplicate artifact kind '" + kind + "'");
    }
    if (fps) {
      if (ref.fps && std::abs(*ref.fps - *fps) > 1e-9) {
        violations.push_back(LinePrefix(line_no) + ToString(key) +
                             ": conflicting fps values");
      }
      ref.fps = fps;
    }
  }

  std::vector<RecordingRef> entries;
  entries.reserve(refs.size());
  for (auto& [key, ref] : refs) entries.push_back(std::move(ref));
  RecordingCatalog catalog(root, std::move(entries));
  for (std::string& v : violations) catalog.AddParseViolation(std::move(v));
  catalog.Validate();
  return catalog;
}

RecordingCatalog ReadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadFileToString(path), path.parent_path());
}

RecordingCatalog LoadManifest(const std::filesystem::path& path) {
  RecordingCatalog catalog = ReadManifest(path);
  if (!catalog.valid()) {
    std::string message = std::to_string(catalog.violations().size()) +
                          " violation(s) in " + path.string();
    for (const std::string& v : catalog.violations()) message += "\n  " + v;
    throw Error(ErrorCode::kValidationError, message);
  }
  return catalog;
}

std::string FormatManifestLine(const ManifestLine& line) {
  // Fixed key order keeps manifests byte-stable.
  nlohmann::ordered_json obj;
  obj["subject"] = line.key.subject_id;
  obj["session"] = ToString(line.key.session);
  obj["condition"] = ToString(line.key.condition);
  obj["task"] = ToString(line.key.task);
  obj["take"] = line.key.take_index;
  obj["kind"] = line.kind;
  obj["path"] = line.path;
  if (line.fps) obj["fps"] = *line.fps;
  return obj.dump();
}

}  // namespace restoreval
