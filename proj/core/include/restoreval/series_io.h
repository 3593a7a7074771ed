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

#ifndef RESTOREVAL_SERIES_IO_H_
#define RESTOREVAL_SERIES_IO_H_

// Series CSV: header "time_s,<ch1>,<ch2>,...", one row per frame, strictly
// increasing time. The frame rate is inferred as 1/median(Δt) rounded to
// three decimals; a single-row file falls back to `default_fps`.

#include <filesystem>
#include <string>
#include <string_view>

#include "restoreval/types.h"

namespace restoreval {

inline constexpr double kDefaultFps = 30.0;

TimeSeries ParseSeriesCsv(std::string_view text,
                          double default_fps = kDefaultFps);
TimeSeries ReadSeriesCsv(const std::filesystem::path& path,
                         double default_fps = kDefaultFps);

std::string FormatSeriesCsv(const TimeSeries& series);
void WriteSeriesCsv(const TimeSeries& series,
                    const std::filesystem::path& path);

}  // namespace restoreval

#endif  // RESTOREVAL_SERIES_IO_H_
