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

#ifndef RESTOREVAL_ATOMIC_FILE_H_
#define RESTOREVAL_ATOMIC_FILE_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace restoreval {

// Writes to "<path>.tmp.<pid>" and renames over `path`. Throws kIoFailure.
void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view contents);

std::string ReadFileToString(const std::filesystem::path& path);

}  // namespace restoreval

#endif  // RESTOREVAL_ATOMIC_FILE_H_
