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

#ifndef RESTOREVAL_TENSOR_IO_H_
#define RESTOREVAL_TENSOR_IO_H_

// "FFR1" tensor files. Layout, all little-endian:
//
//   offset 0   4 bytes   magic "FFR1"
//   offset 4   u32       dtype code (0 = float32)
//   offset 8   u32       ndim
//   offset 12  ndim×u64  dims, outermost first
//   ...        payload   prod(dims) float32 values, row-major
//
// A file must be consumed exactly; trailing bytes are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "restoreval/types.h"

namespace restoreval {

inline constexpr char kTensorMagic[4] = {'F', 'F', 'R', '1'};
inline constexpr std::uint32_t kDtypeFloat32 = 0;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> values;

  std::uint64_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

std::string EncodeTensor(const Tensor& tensor);
Tensor DecodeTensor(std::string_view bytes);

Tensor ReadTensorFile(const std::filesystem::path& path);
void WriteTensorFile(const Tensor& tensor, const std::filesystem::path& path);

// ndim 2 -> FeatureMatrix; ndim 3 (C×H×W) -> single-layer FeatureStack whose
// layer id is the file stem.
std::variant<FeatureMatrix, FeatureStack> ReadFeatureFile(
    const std::filesystem::path& path);

FeatureMatrix ReadFeatureMatrix(const std::filesystem::path& path);
void WriteFeatureMatrix(const FeatureMatrix& matrix,
                        const std::filesystem::path& path);

Tensor ToTensor(const FeatureMatrix& matrix);
FeatureMatrix ToFeatureMatrix(const Tensor& tensor, std::string source = {});

// Per-layer video tensors are T×C×H×W. `layers` pairs a layer id with its
// file; all files must agree on T. Returns one stack per frame.
std::vector<FeatureStack> LoadFeatureSequence(
    const std::vector<std::pair<std::string, std::filesystem::path>>& layers);

// Inverse of LoadFeatureSequence for one layer: frames[t].layers[layer_index]
// stacked into a T×C×H×W tensor.
Tensor StackLayerFrames(const std::vector<FeatureStack>& frames,
                        std::size_t layer_index);

}  // namespace restoreval

#endif  // RESTOREVAL_TENSOR_IO_H_
