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

#include "restoreval/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include <Eigen/Eigenvalues>

#include "restoreval/atomic_file.h"
#include "restoreval/catalog.h"
#include "restoreval/error.h"
#include "restoreval/seeding.h"
#include "restoreval/series_io.h"
#include "restoreval/tensor_io.h"

namespace restoreval {
namespace {

constexpr double kPi = 3.14159265358979323846;

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Antialiased coverage for a signed distance given in pixels.
double Coverage(double signed_distance_px) {
  return Clamp01(0.5 - signed_distance_px);
}

double SegmentDistance(double px, double py, double ax, double ay, double bx,
                       double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

double EllipseSignedDistance(double u, double v, double cx, double cy,
                             double rx, double ry) {
  const double q = std::hypot((u - cx) / rx, (v - cy) / ry);
  return (q - 1.0) * std::min(rx, ry);
}

void Blend(double& pixel, double color, double alpha) {
  pixel += (color - pixel) * alpha;
}

double TraceValue(const TimeSeries& trace, std::int64_t t,
                  std::string_view channel) {
  const auto index = trace.ChannelIndex(channel);
  return index ? trace.at(t, *index) : 0.0;
}

// Dark-mass statistics over a window given in normalized coordinates.
struct DarkMass {
  double mass = 0.0;
  double centroid_y = 0.0;  // pixels
};

DarkMass MeasureDarkMass(const GrayImage& frame, double x0, double x1,
                         double y0, double y1) {
  const double s = static_cast<double>(frame.width);
  const double sy = static_cast<double>(frame.height);
  DarkMass out;
  double weighted_y = 0.0;
  for (std::int64_t y = 0; y < frame.height; ++y) {
    const double v = (y + 0.5) / sy;
    if (v < y0 || v > y1) continue;
    for (std::int64_t x = 0; x < frame.width; ++x) {
      const double u = (x + 0.5) / s;
      if (u < x0 || u > x1) continue;
      const double w = std::max(0.0, 0.5 - frame.at(y, x));
      out.mass += w;
      weighted_y += w * y;
    }
  }
  if (out.mass > 0.0) out.centroid_y = weighted_y / out.mass;
  return out;
}

struct RawMeasurement {
  double brow_y = 0.0;   // mean brow centroid, pixels
  double brow_mass = 0.0;
  double lift = 0.0;     // centre minus corner centroid, pixels
  double eye_mass = 0.0;
};

RawMeasurement MeasureRaw(const GrayImage& frame) {
  const FaceGeometry g = FaceGeometry::Canonical();
  RawMeasurement raw;
  double brow_sum = 0.0;
  int brow_hits = 0;
  for (double side : {-1.0, 1.0}) {
    const double ex = g.center_x + side * g.eye_dx;
    const DarkMass brow =
        MeasureDarkMass(frame, ex - 0.09, ex + 0.09, g.brow_y - 0.11,
                        g.brow_y + 0.04);
    raw.brow_mass += brow.mass;
    if (brow.mass > 1e-6) {
      brow_sum += brow.centroid_y;
      ++brow_hits;
    }
    raw.eye_mass += MeasureDarkMass(frame, ex - 0.08, ex + 0.08, g.eye_y - 0.06,
                                    g.eye_y + 0.06)
                        .mass;
  }
  raw.brow_y = brow_hits > 0 ? brow_sum / brow_hits : 0.0;

  const double mw = g.mouth_half_width;
  const double y0 = g.mouth_y - 0.1, y1 = g.mouth_y + 0.05;
  const DarkMass centre =
      MeasureDarkMass(frame, g.center_x - 0.03, g.center_x + 0.03, y0, y1);
  const DarkMass left = MeasureDarkMass(frame, g.center_x - mw - 0.02,
                                        g.center_x - mw + 0.04, y0, y1);
  const DarkMass right = MeasureDarkMass(frame, g.center_x + mw - 0.04,
                                         g.center_x + mw + 0.02, y0, y1);
  if (centre.mass > 1e-6 && left.mass + right.mass > 1e-6) {
    const double corner =
        (left.centroid_y * left.mass + right.centroid_y * right.mass) /
        (left.mass + right.mass);
    raw.lift = centre.centroid_y - corner;
  }
  return raw;
}

// Linear maps from raw measurements to trace units, fitted on canonical
// renders at expression 0 and 1 for the given frame size.
struct Calibration {
  double brow_y0 = 0.0, brow_y1 = 1.0;
  double lift0 = 0.0, lift1 = 1.0;
  double eye0 = 1.0, eye1 = 0.0;
};

Calibration CalibrationFor(std::int64_t height, std::int64_t width) {
  static std::mutex mu;
  static std::map<std::pair<std::int64_t, std::int64_t>, Calibration> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({height, width});
  if (it != cache.end()) return it->second;
  RenderOptions options;
  options.size = width;
  const FaceGeometry g = FaceGeometry::Canonical();
  Calibration c;
  const RawMeasurement neutral = MeasureRaw(RenderFace(g, 0, 0, 0, options));
  const RawMeasurement brow = MeasureRaw(RenderFace(g, 1, 0, 0, options));
  const RawMeasurement smile = MeasureRaw(RenderFace(g, 0, 1, 0, options));
  const RawMeasurement blink = MeasureRaw(RenderFace(g, 0, 0, 1, options));
  c.brow_y0 = neutral.brow_y;
  c.brow_y1 = brow.brow_y;
  c.lift0 = neutral.lift;
  c.lift1 = smile.lift;
  c.eye0 = neutral.eye_mass;
  c.eye1 = blink.eye_mass;
  cache.emplace(std::make_pair(height, width), c);
  return c;
}

struct AuSpec {
  const char* name;
  double base, brow, smile, blink;
};

constexpr std::array<AuSpec, 20> kAuSpecs = {{
    {"AU01", 0.3, 1.0, 0.0, 0.0},   {"AU02", 0.3, 0.9, 0.0, 0.0},
    {"AU04", 0.6, -0.5, 0.0, 0.0},  {"AU05", 0.4, 0.5, 0.0, -0.3},
    {"AU06", 0.3, 0.0, 0.8, 0.2},   {"AU07", 0.4, 0.0, 0.3, 0.4},
    {"AU09", 0.2, 0.0, 0.2, 0.0},   {"AU10", 0.3, 0.0, 0.5, 0.0},
    {"AU11", 0.2, 0.0, 0.3, 0.0},   {"AU12", 0.3, 0.0, 1.0, 0.0},
    {"AU14", 0.3, 0.0, 0.4, 0.0},   {"AU15", 0.4, 0.0, -0.4, 0.0},
    {"AU17", 0.3, 0.1, -0.2, 0.0},  {"AU20", 0.3, 0.0, 0.3, 0.0},
    {"AU23", 0.3, 0.0, -0.2, 0.0},  {"AU24", 0.3, 0.0, -0.2, 0.0},
    {"AU25", 0.3, 0.0, 0.6, 0.0},   {"AU26", 0.3, 0.2, 0.3, 0.0},
    {"AU28", 0.2, 0.0, -0.1, 0.0},  {"AU43", 0.1, 0.0, 0.0, 1.0},
}};

double Bump(double t, double centre, double width) {
  const double z = (t - centre) / width;
  return std::exp(-0.5 * z * z);
}

std::string SubjectId(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%02d", index + 1);
  return buf;
}

GrayImage AddCameraNoise(GrayImage frame, double sd, std::mt19937_64& rng) {
  if (sd <= 0.0) return frame;
  std::normal_distribution<double> noise(0.0, sd);
  for (float& p : frame.pixels) {
    p = static_cast<float>(Clamp01(p + noise(rng)));
  }
  return frame;
}

}  // namespace

// ---------------------------------------------------------------------------

GaussianSpec GaussianSpec::Isotropic(Eigen::VectorXd mean, double variance,
                                     std::uint64_t seed) {
  GaussianSpec spec;
  spec.form = Form::kIsotropic;
  spec.mean = std::move(mean);
  spec.variance = variance;
  spec.seed = seed;
  return spec;
}

GaussianSpec GaussianSpec::Diagonal(Eigen::VectorXd mean,
                                    Eigen::VectorXd diagonal,
                                    std::uint64_t seed) {
  GaussianSpec spec;
  spec.form = Form::kDiagonal;
  spec.mean = std::move(mean);
  spec.diagonal = std::move(diagonal);
  spec.seed = seed;
  return spec;
}

GaussianSpec GaussianSpec::Full(Eigen::VectorXd mean,
                                Eigen::MatrixXd covariance,
                                std::uint64_t seed) {
  GaussianSpec spec;
  spec.form = Form::kFull;
  spec.mean = std::move(mean);
  spec.covariance = std::move(covariance);
  spec.seed = seed;
  return spec;
}

Eigen::MatrixXd GaussianSpec::Covariance() const {
  switch (form) {
    case Form::kIsotropic:
      return variance * Eigen::MatrixXd::Identity(dim(), dim());
    case Form::kDiagonal:
      return diagonal.asDiagonal();
    case Form::kFull:
      return covariance;
  }
  return {};
}

FeatureMatrix SampleGaussianFeatures(const GaussianSpec& spec,
                                     std::int64_t n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 samples");
  }
  const std::int64_t d = spec.dim();
  Eigen::MatrixXd root;
  switch (spec.form) {
    case GaussianSpec::Form::kIsotropic:
      if (spec.variance < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "negative variance");
      }
      root = std::sqrt(spec.variance) * Eigen::MatrixXd::Identity(d, d);
      break;
    case GaussianSpec::Form::kDiagonal:
      if (spec.diagonal.size() != d || spec.diagonal.minCoeff() < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "diagonal must be nonnegative and match the mean");
      }
      root = spec.diagonal.cwiseSqrt().asDiagonal();
      break;
    case GaussianSpec::Form::kFull: {
      if (spec.covariance.rows() != d || spec.covariance.cols() != d) {
        throw Error(ErrorCode::kInvalidArgument,
                    "covariance must be d×d");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.covariance);
      const Eigen::VectorXd values = es.eigenvalues();
      if (values.minCoeff() < -1e-12 * std::max(1.0, values.maxCoeff())) {
        throw Error(ErrorCode::kInvalidArgument,
                    "covariance is not positive semidefinite");
      }
      root = es.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
      break;
    }
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix out(n, d, "synthetic:gaussian");
  Eigen::VectorXd z(d);
  for (std::int64_t r = 0; r < n; ++r) {
    for (std::int64_t c = 0; c < d; ++c) z(c) = normal(rng);
    const Eigen::VectorXd x = spec.mean + root * z;
    for (std::int64_t c = 0; c < d; ++c) out.at(r, c) = static_cast<float>(x(c));
  }
  return out;
}

double AnalyticFrechet(const GaussianSpec& a, const GaussianSpec& b) {
  if (a.form == GaussianSpec::Form::kFull ||
      b.form == GaussianSpec::Form::kFull) {
    throw Error(ErrorCode::kUnsupportedForm,
                "closed form needs isotropic or diagonal covariances");
  }
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "spec dimensions differ");
  }
  const Eigen::VectorXd da = a.Covariance().diagonal();
  const Eigen::VectorXd db = b.Covariance().diagonal();
  return (a.mean - b.mean).squaredNorm() +
         (da.cwiseSqrt() - db.cwiseSqrt()).squaredNorm();
}

// ---------------------------------------------------------------------------

ShiftedSeries MakeShiftedSeries(const TimeSeries& base,
                                std::int64_t shift_frames, double noise_sd,
                                std::uint64_t seed) {
  const std::int64_t frames = base.frames();
  const std::int64_t channels = base.channels();
  std::vector<double> values(static_cast<std::size_t>(frames * channels));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::int64_t t = 0; t < frames; ++t) {
    const std::int64_t src = std::clamp<std::int64_t>(t - shift_frames, 0,
                                                      frames - 1);
    for (std::int64_t c = 0; c < channels; ++c) {
      double v = base.at(src, c);
      if (noise_sd > 0.0) v += noise_sd * noise(rng);
      values[t * channels + c] = v;
    }
  }
  return {TimeSeries(base.fps(), base.channel_names(), std::move(values)),
          shift_frames};
}

std::vector<double> RandomWalkSignal(std::int64_t length, double amplitude,
                                     double offset, std::uint64_t seed) {
  std::vector<double> walk(static_cast<std::size_t>(std::max<std::int64_t>(length, 0)));
  if (walk.empty()) return walk;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  double x = 0.0;
  for (double& w : walk) {
    x += step(rng);
    w = x;
  }
  // Two passes of a centred moving average.
  constexpr std::int64_t kHalf = 7;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> smooth(walk.size());
    for (std::int64_t i = 0; i < length; ++i) {
      double sum = 0.0;
      std::int64_t count = 0;
      for (std::int64_t j = std::max<std::int64_t>(0, i - kHalf);
           j <= std::min(length - 1, i + kHalf); ++j) {
        sum += walk[j];
        ++count;
      }
      smooth[i] = sum / static_cast<double>(count);
    }
    walk = std::move(smooth);
  }
  const auto [lo, hi] = std::minmax_element(walk.begin(), walk.end());
  const double low = *lo, range = *hi - *lo;
  for (double& w : walk) {
    w = offset + (range > 0.0 ? amplitude * (w - low) / range : 0.0);
  }
  return walk;
}

// ---------------------------------------------------------------------------

FaceGeometry FaceGeometry::ForSubject(std::uint64_t subject_seed) {
  std::mt19937_64 rng(DeriveSeed(subject_seed, "geometry"));
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  FaceGeometry g;
  g.center_x += 0.012 * jitter(rng);
  g.radius_x += 0.02 * jitter(rng);
  g.radius_y += 0.02 * jitter(rng);
  g.eye_dx += 0.008 * jitter(rng);
  g.brow_y += 0.008 * jitter(rng);
  g.mouth_y += 0.012 * jitter(rng);
  g.mouth_half_width += 0.01 * jitter(rng);
  g.skin = 0.70 + 0.07 * jitter(rng);
  return g;
}

GrayImage RenderFace(const FaceGeometry& g, double brow, double smile,
                     double blink, const RenderOptions& options) {
  const std::int64_t size = options.size;
  const double s = static_cast<double>(size);
  GrayImage image{size, size, std::vector<float>(size * size)};
  const double openness = std::max(0.08, 1.0 - Clamp01(blink));
  const double brow_center_y = g.brow_y - brow * kBrowTravel;

  // Mouth centre line as a polyline.
  constexpr int kMouthSegments = 16;
  std::array<std::pair<double, double>, kMouthSegments + 1> mouth;
  for (int i = 0; i <= kMouthSegments; ++i) {
    const double r = -1.0 + 2.0 * i / kMouthSegments;
    mouth[i] = {g.center_x + r * g.mouth_half_width,
                g.mouth_y - smile * kSmileLift * r * r};
  }

  for (std::int64_t y = 0; y < size; ++y) {
    const double v = (y + 0.5) / s;
    for (std::int64_t x = 0; x < size; ++x) {
      const double u = (x + 0.5) / s;
      double p = options.background;
      Blend(p, g.skin,
            Coverage(s * EllipseSignedDistance(u, v, g.center_x, g.center_y,
                                               g.radius_x, g.radius_y)));
      Blend(p, 0.55,
            Coverage(s * (SegmentDistance(u, v, g.center_x, 0.48, g.center_x,
                                          0.60) -
                          0.008)));
      for (double side : {-1.0, 1.0}) {
        const double ex = g.center_x + side * g.eye_dx;
        Blend(p, 0.10,
              Coverage(s * EllipseSignedDistance(u, v, ex, g.eye_y, 0.06,
                                                 0.035 * openness)));
        Blend(p, 0.15,
              Coverage(s * (SegmentDistance(u, v, ex - 0.07, brow_center_y,
                                            ex + 0.07, brow_center_y) -
                            0.02)));
      }
      double mouth_distance = 1e9;
      for (int i = 0; i < kMouthSegments; ++i) {
        mouth_distance = std::min(
            mouth_distance,
            SegmentDistance(u, v, mouth[i].first, mouth[i].second,
                            mouth[i + 1].first, mouth[i + 1].second));
      }
      Blend(p, 0.20, Coverage(s * (mouth_distance - 0.016)));
      image.at(y, x) = static_cast<float>(Clamp01(p));
    }
  }
  return image;
}

FaceSequence SynthFaceSequence(std::uint64_t subject_seed,
                               const TimeSeries& expression_trace,
                               std::int64_t frame_count,
                               const RenderOptions& options) {
  if (frame_count != expression_trace.frames()) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame count " + std::to_string(frame_count) +
                    " does not match trace length " +
                    std::to_string(expression_trace.frames()));
  }
  const FaceGeometry geometry = FaceGeometry::ForSubject(subject_seed);
  FaceSequence out;
  out.trace = expression_trace;
  out.frames.reserve(static_cast<std::size_t>(frame_count));
  for (std::int64_t t = 0; t < frame_count; ++t) {
    out.frames.push_back(RenderFace(geometry,
                                    TraceValue(expression_trace, t, "brow"),
                                    TraceValue(expression_trace, t, "smile"),
                                    TraceValue(expression_trace, t, "blink"),
                                    options));
  }
  return out;
}

// ---------------------------------------------------------------------------

OcclusionTemplate CanonicalSensorTemplate() {
  constexpr double kRadius = 0.04;
  constexpr float kElectrode = 0.9f;
  OcclusionTemplate tpl;
  auto add = [&](double x, double y) {
    tpl.patches.push_back({x, y, kRadius, kElectrode});
  };
  auto add_mirrored = [&](double dx, double y) {
    add(0.5 - dx, y);
    add(0.5 + dx, y);
  };
  // Forehead (frontalis): two rows of six.
  for (double y : {0.16, 0.22}) {
    for (double dx : {0.04, 0.12, 0.20}) add_mirrored(dx, y);
  }
  // Brows and glabella (corrugator, procerus).
  add_mirrored(0.10, 0.30);
  add_mirrored(0.19, 0.30);
  add(0.5, 0.27);
  add(0.5, 0.33);
  // Cheeks (zygomaticus): 3×3 per side.
  for (double y : {0.52, 0.58, 0.64}) {
    for (double dx : {0.16, 0.22, 0.28}) add_mirrored(dx, y);
  }
  // Ring around the mouth (orbicularis oris).
  for (int k = 0; k < 10; ++k) {
    const double angle = 2.0 * kPi * k / 10.0;
    add(0.5 + 0.13 * std::cos(angle), 0.72 + 0.09 * std::sin(angle));
  }
  // Chin (mentalis).
  add_mirrored(0.05, 0.86);
  add_mirrored(0.14, 0.86);
  add(0.5, 0.91);
  add_mirrored(0.09, 0.91);
  // Jaw (masseter) and temples.
  add_mirrored(0.29, 0.74);
  add_mirrored(0.25, 0.82);
  add_mirrored(0.31, 0.45);
  // Nose.
  add(0.5, 0.42);
  add_mirrored(0.06, 0.58);

  for (double side : {-1.0, 1.0}) {
    tpl.cables.push_back(
        {{{0.5 + side * 0.22, 0.64}, {0.5 + side * 0.25, 0.85},
          {0.5 + side * 0.30, 1.0}},
         0.008,
         0.35f});
    tpl.cables.push_back(
        {{{0.5 + side * 0.20, 0.16}, {0.5 + side * 0.40, 0.20},
          {0.5 + side * 0.50, 0.30}},
         0.008,
         0.35f});
  }
  return tpl;
}

namespace {

// Gray value covering pixel (u, v), or a negative value when uncovered.
float CoveringGray(const OcclusionTemplate& occlusion, double u, double v) {
  float gray = -1.0f;
  for (const OcclusionCable& cable : occlusion.cables) {
    for (std::size_t i = 0; i + 1 < cable.points.size(); ++i) {
      if (SegmentDistance(u, v, cable.points[i].first, cable.points[i].second,
                          cable.points[i + 1].first,
                          cable.points[i + 1].second) <= cable.half_width) {
        gray = cable.gray;
        break;
      }
    }
  }
  for (const OcclusionPatch& patch : occlusion.patches) {
    const double dx = u - patch.x, dy = v - patch.y;
    if (dx * dx + dy * dy <= patch.radius * patch.radius) gray = patch.gray;
  }
  return gray;
}

}  // namespace

std::vector<std::uint8_t> OcclusionMask(const OcclusionTemplate& occlusion,
                                        std::int64_t height,
                                        std::int64_t width) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(height * width), 0);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const double u = (x + 0.5) / static_cast<double>(width);
      const double v = (y + 0.5) / static_cast<double>(height);
      mask[y * width + x] = CoveringGray(occlusion, u, v) >= 0.0f ? 1 : 0;
    }
  }
  return mask;
}

std::vector<GrayImage> ApplyOcclusionTemplate(
    const std::vector<GrayImage>& frames, const OcclusionTemplate& occlusion) {
  std::vector<GrayImage> out = frames;
  if (frames.empty()) return out;
  const std::int64_t height = frames.front().height;
  const std::int64_t width = frames.front().width;
  // The layout is fixed, so the per-pixel gray map is computed once.
  std::vector<float> overlay(static_cast<std::size_t>(height * width));
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      overlay[y * width + x] =
          CoveringGray(occlusion, (x + 0.5) / static_cast<double>(width),
                       (y + 0.5) / static_cast<double>(height));
    }
  }
  for (GrayImage& frame : out) {
    if (frame.height != height || frame.width != width) {
      throw Error(ErrorCode::kShapeMismatch, "frames differ in size");
    }
    for (std::size_t i = 0; i < overlay.size(); ++i) {
      if (overlay[i] >= 0.0f) frame.pixels[i] = overlay[i];
    }
  }
  return out;
}

double FaceCoverage(const OcclusionTemplate& occlusion,
                    const FaceGeometry& g, std::int64_t size) {
  const auto mask = OcclusionMask(occlusion, size, size);
  std::int64_t face = 0, covered = 0;
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      const double u = (x + 0.5) / static_cast<double>(size);
      const double v = (y + 0.5) / static_cast<double>(size);
      if (std::hypot((u - g.center_x) / g.radius_x,
                     (v - g.center_y) / g.radius_y) > 1.0) {
        continue;
      }
      ++face;
      covered += mask[y * size + x];
    }
  }
  return face == 0 ? 0.0 : static_cast<double>(covered) / face;
}

// ---------------------------------------------------------------------------

std::vector<float> ToyEmbedding(const GrayImage& frame) {
  if (frame.height % 8 != 0 || frame.width % 8 != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "toy embedding needs frame sides divisible by 8");
  }
  std::vector<float> out(kToyEmbeddingDim, 0.0f);
  const std::int64_t ch = frame.height / 8, cw = frame.width / 8;
  for (std::int64_t y = 0; y < frame.height; ++y) {
    for (std::int64_t x = 0; x < frame.width; ++x) {
      out[(y / ch) * 8 + x / cw] += frame.at(y, x);
    }
  }
  for (int i = 0; i < 64; ++i) out[i] /= static_cast<float>(ch * cw);
  const std::int64_t gh = frame.height / 4, gw = frame.width / 4;
  for (std::int64_t y = 0; y + 1 < frame.height; ++y) {
    for (std::int64_t x = 0; x + 1 < frame.width; ++x) {
      const float g = std::abs(frame.at(y, x + 1) - frame.at(y, x)) +
                      std::abs(frame.at(y + 1, x) - frame.at(y, x));
      out[64 + (y / gh) * 4 + x / gw] += g;
    }
  }
  for (int i = 64; i < kToyEmbeddingDim; ++i) {
    out[i] /= static_cast<float>(gh * gw);
  }
  return out;
}

FeatureStack ToyFeatureStack(const GrayImage& frame,
                             std::int64_t frame_index) {
  FeatureStack stack;
  stack.frame_index = frame_index;
  for (const auto& [id, grid] :
       {std::pair<const char*, std::int64_t>{"l1", 8}, {"l2", 4}}) {
    if (frame.height % grid != 0 || frame.width % grid != 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "toy features need frame sides divisible by 8");
    }
    FeatureLayer layer;
    layer.id = id;
    layer.channels = 5;
    layer.height = grid;
    layer.width = grid;
    layer.values.assign(static_cast<std::size_t>(5 * grid * grid), 0.0f);
    const std::int64_t ch = frame.height / grid, cw = frame.width / grid;
    for (std::int64_t gy = 0; gy < grid; ++gy) {
      for (std::int64_t gx = 0; gx < grid; ++gx) {
        double sum = 0.0, sq = 0.0, dx = 0.0, dy = 0.0;
        for (std::int64_t y = gy * ch; y < (gy + 1) * ch; ++y) {
          for (std::int64_t x = gx * cw; x < (gx + 1) * cw; ++x) {
            const double p = frame.at(y, x);
            sum += p;
            sq += p * p;
            if (x + 1 < frame.width) dx += frame.at(y, x + 1) - p;
            if (y + 1 < frame.height) dy += frame.at(y + 1, x) - p;
          }
        }
        const double n = static_cast<double>(ch * cw);
        const double mean = sum / n;
        layer.at(0, gy, gx) = static_cast<float>(mean - 0.5);
        layer.at(1, gy, gx) =
            static_cast<float>(std::sqrt(std::max(0.0, sq / n - mean * mean)));
        layer.at(2, gy, gx) = static_cast<float>(dx / n);
        layer.at(3, gy, gx) = static_cast<float>(dy / n);
        layer.at(4, gy, gx) = 0.1f;
      }
    }
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

FaceMeasurement MeasureFace(const GrayImage& frame) {
  const Calibration c = CalibrationFor(frame.height, frame.width);
  const RawMeasurement raw = MeasureRaw(frame);
  FaceMeasurement m;
  if (raw.brow_mass > 1e-6 && c.brow_y1 != c.brow_y0) {
    m.brow = (raw.brow_y - c.brow_y0) / (c.brow_y1 - c.brow_y0);
  }
  if (c.lift1 != c.lift0) m.smile = (raw.lift - c.lift0) / (c.lift1 - c.lift0);
  if (c.eye1 != c.eye0) m.blink = (raw.eye_mass - c.eye0) / (c.eye1 - c.eye0);
  return m;
}

double BrowCentroidY(const GrayImage& frame) {
  const FaceGeometry g = FaceGeometry::Canonical();
  const double ex = g.center_x - g.eye_dx;
  return MeasureDarkMass(frame, ex - 0.09, ex + 0.09, g.brow_y - 0.11,
                         g.brow_y + 0.04)
      .centroid_y;
}

const std::vector<std::string>& RdfAuChannels() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const AuSpec& spec : kAuSpecs) out.emplace_back(spec.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& EmotionChannels() {
  static const std::vector<std::string> names = {
      "anger", "disgust", "fear", "happiness", "sadness", "surprise",
      "neutral"};
  return names;
}

TimeSeries ToyAuSeries(const std::vector<GrayImage>& frames, double fps) {
  std::vector<double> values;
  values.reserve(frames.size() * kAuSpecs.size());
  for (const GrayImage& frame : frames) {
    const FaceMeasurement m = MeasureFace(frame);
    for (const AuSpec& spec : kAuSpecs) {
      const double v = spec.base + spec.brow * m.brow + spec.smile * m.smile +
                       spec.blink * m.blink;
      values.push_back(std::clamp(v, 0.0, 5.0));
    }
  }
  return TimeSeries(fps, RdfAuChannels(), std::move(values));
}

TimeSeries ToyEmotionSeries(const std::vector<GrayImage>& frames, double fps) {
  std::vector<double> values;
  values.reserve(frames.size() * 7);
  for (const GrayImage& frame : frames) {
    const FaceMeasurement m = MeasureFace(frame);
    const std::array<double, 7> scores = {
        -0.5 - 1.5 * m.brow,
        -1.0 - 0.5 * m.smile + 0.5 * m.blink,
        -1.0 + 1.5 * m.brow - 1.0 * m.smile,
        -0.5 + 4.0 * m.smile,
        -0.5 - 2.0 * m.smile,
        -1.0 + 4.0 * m.brow,
        1.5 - 2.0 * std::abs(m.brow) - 2.0 * std::abs(m.smile)};
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    std::array<double, 7> p;
    for (int i = 0; i < 7; ++i) {
      p[i] = std::exp(scores[i] - top);
      total += p[i];
    }
    for (double x : p) values.push_back(x / total);
  }
  return TimeSeries(fps, EmotionChannels(), std::move(values));
}

// ---------------------------------------------------------------------------

TimeSeries TaskExpressionTrace(Task task, std::uint64_t subject_seed,
                               std::uint64_t recording_seed,
                               std::int64_t frames, double fps) {
  // The task script depends on the subject only; timing, amplitude, blinks
  // and jitter vary per recording.
  std::mt19937_64 script_rng(
      DeriveSeed(subject_seed, "script|" + std::string(ToString(task))));
  std::mt19937_64 rec_rng(recording_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double duration = frames / fps;
  const double delay = 0.4 * unit(rec_rng);
  const double gain = 0.9 + 0.2 * unit(rec_rng);

  struct Event {
    double time, width, brow, smile;
  };
  std::vector<Event> events;
  auto spread = [&](int count, int index) {
    return duration * (index + 0.5 + 0.2 * (unit(script_rng) - 0.5)) / count;
  };
  switch (task) {
    case Task::kSchaede:
      for (int i = 0; i < 5; ++i) {
        events.push_back({spread(5, i), 0.15, 0.8 + 0.2 * unit(script_rng), 0.0});
      }
      break;
    case Task::kSentence:
      for (int i = 0; i < 8; ++i) {
        events.push_back({spread(8, i), 0.08, 0.0, 0.3 + 0.3 * unit(script_rng)});
      }
      break;
    case Task::kEmotion:
      for (int i = 0; i < 4; ++i) {
        const bool happy = i % 2 == 0;
        events.push_back({spread(4, i), 0.25, happy ? 0.0 : 1.0,
                          happy ? 1.0 : 0.0});
      }
      break;
  }
  std::vector<double> blinks;
  const int blink_count = 1 + static_cast<int>(3 * unit(rec_rng));
  for (int i = 0; i < blink_count; ++i) blinks.push_back(duration * unit(rec_rng));
  const std::vector<double> talk =
      task == Task::kSentence
          ? RandomWalkSignal(frames, 0.2, 0.0, DeriveSeed(recording_seed, "talk"))
          : std::vector<double>(static_cast<std::size_t>(frames), 0.0);

  std::normal_distribution<double> jitter(0.0, 0.01);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(frames * 3));
  for (std::int64_t t = 0; t < frames; ++t) {
    const double time = t / fps - delay;
    double brow = 0.0, smile = talk[t], blink = 0.0;
    for (const Event& e : events) {
      const double b = Bump(time, e.time, e.width);
      brow += gain * e.brow * b;
      smile += gain * e.smile * b;
    }
    for (double at : blinks) blink = std::max(blink, Bump(t / fps, at, 0.05));
    values.push_back(brow + jitter(rec_rng));
    values.push_back(smile + jitter(rec_rng));
    values.push_back(blink);
  }
  return TimeSeries(fps, {"brow", "smile", "blink"}, std::move(values));
}

SynthBundle WriteSynthBundle(const std::filesystem::path& dir,
                             const SynthBundleOptions& options) {
  if (options.subjects < 1 || options.frames < 2 || options.sensor_takes < 1 ||
      options.size < 8 || options.size % 8 != 0 || !(options.fps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synth bundle options");
  }
  std::filesystem::create_directories(dir);
  const OcclusionTemplate sensors = CanonicalSensorTemplate();
  SynthBundle bundle;
  bundle.manifest = dir / "manifest.jsonl";
  std::string manifest;

  for (int s = 0; s < options.subjects; ++s) {
    const std::string subject = SubjectId(s);
    const std::uint64_t subject_seed =
        DeriveSeed(options.seed, "subject|" + subject);
    std::mt19937_64 subject_rng(DeriveSeed(subject_seed, "setup"));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double setup_offset = 0.02 * unit(subject_rng);

    for (Session session : kAllSessions) {
      RenderOptions render;
      render.size = options.size;
      // The recording setup changes between sessions.
      render.background =
          (session == Session::kS1 ? 0.25 : 0.33) + setup_offset;

      for (Task task : kAllTasks) {
        auto emit = [&](Condition condition, int take,
                        const std::vector<GrayImage>& frames) {
          const RecordingKey key{subject, session, condition, task, take};
          const std::filesystem::path rel =
              std::filesystem::path(subject) / std::string(ToString(session)) /
              (std::string(ToString(condition)) + std::to_string(take)) /
              std::string(ToString(task));
          std::filesystem::create_directories(dir / rel);
          auto line = [&](const std::string& kind, const std::string& file) {
            manifest += FormatManifestLine(
                {key, kind, (rel / file).generic_string(), options.fps});
            manifest += '\n';
            ++bundle.files;
          };

          FeatureMatrix embedding(static_cast<std::int64_t>(frames.size()),
                                  kToyEmbeddingDim, ToString(key));
          std::vector<FeatureStack> stacks;
          stacks.reserve(frames.size());
          for (std::size_t t = 0; t < frames.size(); ++t) {
            const std::vector<float> e = ToyEmbedding(frames[t]);
            std::copy(e.begin(), e.end(),
                      embedding.values.begin() +
                          static_cast<std::ptrdiff_t>(t) * kToyEmbeddingDim);
            stacks.push_back(
                ToyFeatureStack(frames[t], static_cast<std::int64_t>(t)));
          }
          WriteFeatureMatrix(embedding, dir / rel / "embedding.ffr");
          line("embedding", "embedding.ffr");
          for (std::size_t l = 0; l < stacks.front().layers.size(); ++l) {
            const std::string& id = stacks.front().layers[l].id;
            WriteTensorFile(StackLayerFrames(stacks, l),
                            dir / rel / (id + ".ffr"));
            line("features:" + id, id + ".ffr");
          }
          WriteSeriesCsv(ToyAuSeries(frames, options.fps), dir / rel / "au.csv");
          line("au", "au.csv");
          WriteSeriesCsv(ToyEmotionSeries(frames, options.fps),
                         dir / rel / "emotion.csv");
          line("emotion", "emotion.csv");
          if (options.write_frames) {
            Tensor t;
            t.dims = {frames.size(), static_cast<std::uint64_t>(options.size),
                      static_cast<std::uint64_t>(options.size)};
            for (const GrayImage& f : frames) {
              t.values.insert(t.values.end(), f.pixels.begin(), f.pixels.end());
            }
            WriteTensorFile(t, dir / rel / "frames.ffr");
            line("frames", "frames.ffr");
          }
          ++bundle.recordings;
        };

        auto record = [&](const std::string& label) {
          const std::uint64_t rec_seed = DeriveSeed(
              subject_seed, std::string(ToString(session)) + "|" +
                                std::string(ToString(task)) + "|" + label);
          const TimeSeries trace = TaskExpressionTrace(
              task, subject_seed, rec_seed, options.frames, options.fps);
          FaceSequence seq =
              SynthFaceSequence(subject_seed, trace, options.frames, render);
          std::mt19937_64 noise_rng(DeriveSeed(rec_seed, "camera"));
          for (GrayImage& f : seq.frames) {
            f = AddCameraNoise(std::move(f), options.camera_noise, noise_rng);
          }
          return std::move(seq.frames);
        };

        emit(Condition::kNormal, 1, record("normal"));
        for (int take = 1; take <= options.sensor_takes; ++take) {
          const std::vector<GrayImage> scene =
              record("sensor" + std::to_string(take));
          emit(Condition::kSensor, take, ApplyOcclusionTemplate(scene, sensors));
          // Perfect restoration: every occluded pixel comes back from the
          // unobstructed scene.
          emit(Condition::kClean, take, scene);
        }
      }
    }
  }
  WriteFileAtomically(bundle.manifest, manifest);
  return bundle;
}

}  // namespace restoreval
