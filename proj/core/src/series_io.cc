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

#include "restoreval/series_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "restoreval/atomic_file.h"
#include "restoreval/error.h"

namespace restoreval {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double ParseNumber(std::string_view field, std::size_t line_no) {
  field = Trim(field);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                            ": bad number '" +
                                            std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteValue,
                "line " + std::to_string(line_no) + ": non-finite value");
  }
  return value;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TimeSeries ParseSeriesCsv(std::string_view text, double default_fps) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) {
    throw Error(ErrorCode::kHeaderMismatch, "empty series file");
  }

  const auto header = SplitFields(Trim(lines[0]));
  if (header.size() < 2 || Trim(header[0]) != "time_s") {
    throw Error(ErrorCode::kHeaderMismatch,
                "header must be 'time_s,<channel>,...'");
  }
  std::vector<std::string> channels;
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string_view name = Trim(header[i]);
    if (name.empty()) {
      throw Error(ErrorCode::kHeaderMismatch, "empty channel name");
    }
    if (std::find(channels.begin(), channels.end(), name) != channels.end()) {
      throw Error(ErrorCode::kHeaderMismatch,
                  "duplicate channel '" + std::string(name) + "'");
    }
    channels.emplace_back(name);
  }

  std::vector<double> times;
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = SplitFields(Trim(lines[i]));
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kRaggedRow,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    const double t = ParseNumber(fields[0], line_no);
    if (!times.empty() && !(t > times.back())) {
      throw Error(ErrorCode::kNonMonotonicTime,
                  "line " + std::to_string(line_no) +
                      ": time does not strictly increase");
    }
    times.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      values.push_back(ParseNumber(fields[c], line_no));
    }
  }
  if (times.empty()) {
    throw Error(ErrorCode::kEmptySeries, "series has no rows");
  }

  double fps = default_fps;
  if (times.size() >= 2) {
    std::vector<double> deltas(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
      deltas[i - 1] = times[i] - times[i - 1];
    }
    fps = std::round(1000.0 / Median(std::move(deltas))) / 1000.0;
  }
  return TimeSeries(fps, std::move(channels), std::move(values));
}

TimeSeries ReadSeriesCsv(const std::filesystem::path& path,
                         double default_fps) {
  try {
    return ParseSeriesCsv(ReadFileToString(path), default_fps);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string FormatSeriesCsv(const TimeSeries& series) {
  std::string out = "time_s";
  for (const std::string& name : series.channel_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  char buf[64];
  for (std::int64_t t = 0; t < series.frames(); ++t) {
    std::snprintf(buf, sizeof(buf), "%.9g",
                  static_cast<double>(t) / series.fps());
    out += buf;
    for (std::int64_t c = 0; c < series.channels(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.9g", series.at(t, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void WriteSeriesCsv(const TimeSeries& series,
                    const std::filesystem::path& path) {
  WriteFileAtomically(path, FormatSeriesCsv(series));
}

}  // namespace restoreval
