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

#ifndef RESTOREVAL_SYNTH_H_
#define RESTOREVAL_SYNTH_H_

// Synthetic fixtures with known ground truth. Every generator is a pure
// function of its arguments and seed.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "restoreval/types.h"

namespace restoreval {

// ---------------------------------------------------------------------------
// Gaussian feature sets.

struct GaussianSpec {
  enum class Form { kIsotropic, kDiagonal, kFull };

  Form form = Form::kIsotropic;
  Eigen::VectorXd mean;
  double variance = 1.0;       // kIsotropic
  Eigen::VectorXd diagonal;    // kDiagonal
  Eigen::MatrixXd covariance;  // kFull
  std::uint64_t seed = 0;

  static GaussianSpec Isotropic(Eigen::VectorXd mean, double variance,
                                std::uint64_t seed);
  static GaussianSpec Diagonal(Eigen::VectorXd mean, Eigen::VectorXd diagonal,
                               std::uint64_t seed);
  static GaussianSpec Full(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                           std::uint64_t seed);

  std::int64_t dim() const { return mean.size(); }
  Eigen::MatrixXd Covariance() const;
};

FeatureMatrix SampleGaussianFeatures(const GaussianSpec& spec, std::int64_t n);

// ‖Δμ‖² + Σᵢ (√aᵢ − √bᵢ)² for isotropic/diagonal specs; kUnsupportedForm for
// full covariances.
double AnalyticFrechet(const GaussianSpec& a, const GaussianSpec& b);

// ---------------------------------------------------------------------------
// Time series.

struct ShiftedSeries {
  TimeSeries series;
  std::int64_t true_shift = 0;  // positive: the copy lags the base
};

// out_t = base_{t − shift} + N(0, noise_sd²); indices outside the base are
// clamped to its first/last frame.
ShiftedSeries MakeShiftedSeries(const TimeSeries& base,
                                std::int64_t shift_frames, double noise_sd,
                                std::uint64_t seed);

// Smoothed random walk rescaled to [offset, offset + amplitude].
std::vector<double> RandomWalkSignal(std::int64_t length, double amplitude,
                                     double offset, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Procedural faces.

struct GrayImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> pixels;  // row-major, values in [0, 1]

  float at(std::int64_t y, std::int64_t x) const { return pixels[y * width + x]; }
  float& at(std::int64_t y, std::int64_t x) { return pixels[y * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

// Face geometry in normalized crop coordinates (x right, y down, [0, 1]).
struct FaceGeometry {
  double center_x = 0.5;
  double center_y = 0.52;
  double radius_x = 0.36;
  double radius_y = 0.45;
  double eye_dx = 0.14;
  double eye_y = 0.42;
  double brow_y = 0.33;
  double mouth_y = 0.72;
  double mouth_half_width = 0.12;
  double skin = 0.70;

  static FaceGeometry Canonical() { return {}; }
  static FaceGeometry ForSubject(std::uint64_t subject_seed);
};

// Vertical brow travel per unit of the "brow" channel (normalized units).
inline constexpr double kBrowTravel = 0.06;
// Corner lift per unit of the "smile" channel.
inline constexpr double kSmileLift = 0.06;

struct RenderOptions {
  std::int64_t size = 64;
  double background = 0.25;
};

struct FaceSequence {
  std::vector<GrayImage> frames;
  TimeSeries trace;  // the driving trace, unchanged
};

// Channels read from the trace: "brow" (elevation), "smile" (mouth corner
// lift), "blink" (eye closure); absent channels are 0. Throws
// kInvalidArgument unless frame_count equals the trace length.
FaceSequence SynthFaceSequence(std::uint64_t subject_seed,
                               const TimeSeries& expression_trace,
                               std::int64_t frame_count,
                               const RenderOptions& options = {});

GrayImage RenderFace(const FaceGeometry& geometry, double brow, double smile,
                     double blink, const RenderOptions& options = {});

// ---------------------------------------------------------------------------
// Occlusion.

struct OcclusionPatch {
  double x = 0.5;
  double y = 0.5;
  double radius = 0.03;
  float gray = 0.9f;
};

struct OcclusionCable {
  std::vector<std::pair<double, double>> points;
  double half_width = 0.008;
  float gray = 0.35f;
};

struct OcclusionTemplate {
  std::vector<OcclusionPatch> patches;
  std::vector<OcclusionCable> cables;
};

// 62 electrodes at fixed anatomical positions plus lead cables.
OcclusionTemplate CanonicalSensorTemplate();

// 1 where the template covers the pixel centre.
std::vector<std::uint8_t> OcclusionMask(const OcclusionTemplate& occlusion,
                                        std::int64_t height,
                                        std::int64_t width);

std::vector<GrayImage> ApplyOcclusionTemplate(
    const std::vector<GrayImage>& frames, const OcclusionTemplate& occlusion);

// Fraction of the face ellipse's pixels covered by the template, counted on
// a size×size grid.
double FaceCoverage(const OcclusionTemplate& occlusion,
                    const FaceGeometry& geometry, std::int64_t size);

// ---------------------------------------------------------------------------
// Desk-scale stand-ins for the neural producers.

// Frame embeddings: 8×8 mean-pooled intensity plus 4×4 pooled gradient
// magnitude (80 values). Frame side must be a multiple of 8.
std::vector<float> ToyEmbedding(const GrayImage& frame);
inline constexpr std::int64_t kToyEmbeddingDim = 80;

// Two feature layers, "l1" on an 8×8 grid and "l2" on a 4×4 grid, five
// channels each: centered mean, local std, mean dx, mean dy, bias.
FeatureStack ToyFeatureStack(const GrayImage& frame, std::int64_t frame_index);

// Geometric measurements of the expression, read from fixed windows of the
// canonical face.
struct FaceMeasurement {
  double brow = 0.0;
  double smile = 0.0;
  double blink = 0.0;
};
FaceMeasurement MeasureFace(const GrayImage& frame);

// Vertical centroid (pixels) of dark mass in the left brow window.
double BrowCentroidY(const GrayImage& frame);

// Twenty AU channels (AU43 last) derived from the measurements.
TimeSeries ToyAuSeries(const std::vector<GrayImage>& frames, double fps);
// Seven emotion probabilities.
TimeSeries ToyEmotionSeries(const std::vector<GrayImage>& frames, double fps);

const std::vector<std::string>& RdfAuChannels();
const std::vector<std::string>& EmotionChannels();

// ---------------------------------------------------------------------------
// Complete fixture bundles.

struct SynthBundleOptions {
  int subjects = 3;
  std::int64_t frames = 150;
  std::int64_t size = 64;
  double fps = 30.0;
  std::uint64_t seed = 0;
  int sensor_takes = 2;
  double camera_noise = 0.01;
  bool write_frames = false;
};

struct SynthBundle {
  std::filesystem::path manifest;
  int recordings = 0;
  int files = 0;
};

// Writes, per subject/session/task: one normal recording, `sensor_takes`
// occluded recordings, and for each a "clean" recording that restores the
// occluded pixels from the unobstructed source. Artifacts are embeddings,
// feature layers, AU and emotion CSVs (and frames on request), listed in
// <dir>/manifest.jsonl.
SynthBundle WriteSynthBundle(const std::filesystem::path& dir,
                             const SynthBundleOptions& options);

// The expression trace a subject produces for a task in one recording.
TimeSeries TaskExpressionTrace(Task task, std::uint64_t subject_seed,
                               std::uint64_t recording_seed,
                               std::int64_t frames, double fps);

}  // namespace restoreval

#endif  // RESTOREVAL_SYNTH_H_
