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

#include "restoreval/tensor_io.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "restoreval/atomic_file.h"
#include "restoreval/error.h"

namespace restoreval {
namespace {

static_assert(std::endian::native == std::endian::little,
              "FFR1 I/O assumes a little-endian host");

constexpr std::size_t kFixedHeaderBytes = 12;

template <typename T>
void AppendLe(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T LoadLe(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

void CheckFinite(const std::vector<float>& values, std::string_view what) {
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  std::string(what) + " contains a non-finite value");
    }
  }
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return n;
}

std::string EncodeTensor(const Tensor& tensor) {
  if (tensor.element_count() != tensor.values.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor values do not match declared dims");
  }
  CheckFinite(tensor.values, "tensor");
  std::string out;
  out.reserve(kFixedHeaderBytes + 8 * tensor.dims.size() +
              4 * tensor.values.size());
  out.append(kTensorMagic, 4);
  AppendLe<std::uint32_t>(out, kDtypeFloat32);
  AppendLe<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (std::uint64_t d : tensor.dims) AppendLe<std::uint64_t>(out, d);
  const auto* payload = reinterpret_cast<const char*>(tensor.values.data());
  out.append(payload, tensor.values.size() * sizeof(float));
  return out;
}

Tensor DecodeTensor(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "missing FFR1 magic");
  }
  if (bytes.size() < kFixedHeaderBytes) {
    throw Error(ErrorCode::kTruncatedPayload, "header is truncated");
  }
  const auto dtype = LoadLe<std::uint32_t>(bytes, 4);
  if (dtype != kDtypeFloat32) {
    throw Error(ErrorCode::kUnsupportedDtype,
                "dtype code " + std::to_string(dtype));
  }
  const auto ndim = LoadLe<std::uint32_t>(bytes, 8);
  const std::size_t header = kFixedHeaderBytes + 8 * std::size_t{ndim};
  if (bytes.size() < header) {
    throw Error(ErrorCode::kTruncatedPayload, "dims are truncated");
  }
  Tensor tensor;
  tensor.dims.resize(ndim);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    tensor.dims[i] = LoadLe<std::uint64_t>(bytes, kFixedHeaderBytes + 8 * i);
    if (tensor.dims[i] != 0 &&
        count > std::numeric_limits<std::uint64_t>::max() / 8 / tensor.dims[i]) {
      throw Error(ErrorCode::kTruncatedPayload, "declared size overflows");
    }
    count *= tensor.dims[i];
  }
  const std::uint64_t payload = count * sizeof(float);
  const std::uint64_t available = bytes.size() - header;
  if (available < payload) {
    throw Error(ErrorCode::kTruncatedPayload,
                "expected " + std::to_string(payload) + " payload bytes, got " +
                    std::to_string(available));
  }
  if (available > payload) {
    throw Error(ErrorCode::kTrailingData,
                std::to_string(available - payload) + " bytes after payload");
  }
  tensor.values.resize(count);
  std::memcpy(tensor.values.data(), bytes.data() + header, payload);
  CheckFinite(tensor.values, "tensor file");
  return tensor;
}

Tensor ReadTensorFile(const std::filesystem::path& path) {
  try {
    return DecodeTensor(ReadFileToString(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteTensorFile(const Tensor& tensor, const std::filesystem::path& path) {
  WriteFileAtomically(path, EncodeTensor(tensor));
}

Tensor ToTensor(const FeatureMatrix& matrix) {
  return Tensor{{static_cast<std::uint64_t>(matrix.rows),
                 static_cast<std::uint64_t>(matrix.dim)},
                matrix.values};
}

FeatureMatrix ToFeatureMatrix(const Tensor& tensor, std::string source) {
  if (tensor.dims.size() != 2 || tensor.dims[0] < 1 || tensor.dims[1] < 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature matrix must be a non-empty 2-d tensor");
  }
  FeatureMatrix m;
  m.rows = static_cast<std::int64_t>(tensor.dims[0]);
  m.dim = static_cast<std::int64_t>(tensor.dims[1]);
  m.values = tensor.values;
  m.source = std::move(source);
  return m;
}

std::variant<FeatureMatrix, FeatureStack> ReadFeatureFile(
    const std::filesystem::path& path) {
  Tensor t = ReadTensorFile(path);
  if (t.dims.size() == 2) return ToFeatureMatrix(t, path.string());
  if (t.dims.size() == 3) {
    FeatureLayer layer;
    layer.id = path.stem().string();
    layer.channels = static_cast<std::int64_t>(t.dims[0]);
    layer.height = static_cast<std::int64_t>(t.dims[1]);
    layer.width = static_cast<std::int64_t>(t.dims[2]);
    layer.values = std::move(t.values);
    FeatureStack stack;
    stack.layers.push_back(std::move(layer));
    ValidateStack(stack);
    return stack;
  }
  throw Error(ErrorCode::kShapeMismatch,
              path.string() + ": expected a 2-d or 3-d tensor");
}

FeatureMatrix ReadFeatureMatrix(const std::filesystem::path& path) {
  return ToFeatureMatrix(ReadTensorFile(path), path.string());
}

void WriteFeatureMatrix(const FeatureMatrix& matrix,
                        const std::filesystem::path& path) {
  WriteTensorFile(ToTensor(matrix), path);
}

std::vector<FeatureStack> LoadFeatureSequence(
    const std::vector<std::pair<std::string, std::filesystem::path>>& layers) {
  std::vector<FeatureStack> frames;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& [layer_id, path] = layers[l];
    Tensor t = ReadTensorFile(path);
    if (t.dims.size() != 4) {
      throw Error(ErrorCode::kShapeMismatch,
                  path.string() + ": layer sequence must be T×C×H×W");
    }
    const auto frame_count = static_cast<std::int64_t>(t.dims[0]);
    if (l == 0) {
      frames.resize(static_cast<std::size_t>(frame_count));
      for (std::int64_t i = 0; i < frame_count; ++i) frames[i].frame_index = i;
    } else if (static_cast<std::int64_t>(frames.size()) != frame_count) {
      throw Error(ErrorCode::kShapeMismatch,
                  path.string() + ": frame count differs between layers");
    }
    const std::size_t per_frame = t.dims[1] * t.dims[2] * t.dims[3];
    for (std::int64_t i = 0; i < frame_count; ++i) {
      FeatureLayer layer;
      layer.id = layer_id;
      layer.channels = static_cast<std::int64_t>(t.dims[1]);
      layer.height = static_cast<std::int64_t>(t.dims[2]);
      layer.width = static_cast<std::int64_t>(t.dims[3]);
      layer.values.assign(t.values.begin() + i * per_frame,
                          t.values.begin() + (i + 1) * per_frame);
      frames[i].layers.push_back(std::move(layer));
    }
  }
  return frames;
}

Tensor StackLayerFrames(const std::vector<FeatureStack>& frames,
                        std::size_t layer_index) {
  if (frames.empty()) {
    throw Error(ErrorCode::kEmptySequence, "no frames to stack");
  }
  const FeatureLayer& first = frames.front().layers.at(layer_index);
  Tensor t;
  t.dims = {frames.size(), static_cast<std::uint64_t>(first.channels),
            static_cast<std::uint64_t>(first.height),
            static_cast<std::uint64_t>(first.width)};
  t.values.reserve(t.element_count());
  for (const FeatureStack& frame : frames) {
    const FeatureLayer& layer = frame.layers.at(layer_index);
    if (layer.channels != first.channels || layer.height != first.height ||
        layer.width != first.width) {
      throw Error(ErrorCode::kShapeMismatch, "layer shape varies across frames");
    }
    t.values.insert(t.values.end(), layer.values.begin(), layer.values.end());
  }
  return t;
}

}  // namespace restoreval
