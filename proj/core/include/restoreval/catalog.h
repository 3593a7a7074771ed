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

#ifndef RESTOREVAL_CATALOG_H_
#define RESTOREVAL_CATALOG_H_

// Recording manifests are JSON-lines files, one artifact per line:
//
//   {"subject":"s01","session":"S1","condition":"sensor","task":"schaede",
//    "take":2,"kind":"embedding","path":"s01/S1/sensor2/schaede/emb.ffr",
//    "fps":30}
//
// `fps` is optional. Relative paths resolve against the manifest directory.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "restoreval/types.h"

namespace restoreval {

class RecordingCatalog {
 public:
  RecordingCatalog() = default;
  RecordingCatalog(std::filesystem::path root,
                   std::vector<RecordingRef> entries);

  const std::filesystem::path& root() const { return root_; }
  // Sorted by RecordingKey.
  const std::vector<RecordingRef>& entries() const { return entries_; }
  const std::vector<std::string>& violations() const { return violations_; }
  bool valid() const { return violations_.empty(); }

  std::vector<std::string> Subjects() const;
  const RecordingRef* Find(const RecordingKey& key) const;

  // Recomputes `violations()`: parse-time problems plus every catalog rule.
  void Validate();
  void AddParseViolation(std::string violation) {
    parse_violations_.push_back(std::move(violation));
  }

 private:
  std::filesystem::path root_;
  std::vector<RecordingRef> entries_;
  std::vector<std::string> parse_violations_;
  std::vector<std::string> violations_;
};

// Parses and validates without throwing on rule violations; they are listed
// in `violations()`. Malformed lines throw kParseError naming the line.
RecordingCatalog ParseManifest(std::string_view text,
                               const std::filesystem::path& root);
RecordingCatalog ReadManifest(const std::filesystem::path& path);

// ReadManifest, then throws kValidationError listing every violation.
RecordingCatalog LoadManifest(const std::filesystem::path& path);

struct ManifestLine {
  RecordingKey key;
  std::string kind;
  std::string path;  // as written, usually relative
  std::optional<double> fps;
};

std::string FormatManifestLine(const ManifestLine& line);

}  // namespace restoreval

#endif  // RESTOREVAL_CATALOG_H_
