#pragma once

// Normal accuracy (average angular error) and freespace segmentation scores.

#include <cstdint>
#include <optional>

#include "normal_forge/raster.hpp"
#include "normal_forge/sne.hpp"
#include "normal_forge/vec3.hpp"

namespace normal_forge {

// Angle between two nonzero vectors, acos of the clamped normalized dot
// product. With sign_invariant the result is min(e, pi - e).
double angular_error(const Vec3& n, const Vec3& n_hat, bool sign_invariant = false);

struct AngularErrorMap {
  Raster<double> error;  // radians, in [0, pi]
  Mask valid;
  double mean = 0.0;     // e_AAE, radians
  std::size_t count = 0;
};

// Per-pixel angular error over jointly valid pixels, reduced in row-major
// order. Throws EmptyEvaluation when no pixel is jointly valid.
AngularErrorMap aae(const NormalMap& gt, const NormalMap& pred, bool sign_invariant = false);

// Median of the valid entries.
double median_error(const AngularErrorMap& m);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Positive = freespace. Pixels with valid == 0 are ignored.
ConfusionCounts confusion(const Mask& pred, const Mask& gt, const Mask& valid);

// Each score is std::nullopt when its ratio is 0/0.
struct SegmentationScores {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fscore;
  std::optional<double> iou;
};

// Throws EmptyEvaluation when all counts are zero.
SegmentationScores scores(const ConfusionCounts& c);

struct FreespaceOptions {
  Vec3 up{0.0, -1.0, 0.0};
  double max_angle = 0.2617993877991494;  // 15 degrees
  bool largest_component = true;
};

// Positive where the normal is within max_angle of +/- up. Optionally keeps
// only the largest 4-connected positive component (ties go to the component
// met first in row-major order).
Mask normal_freespace(const NormalMap& nm, const FreespaceOptions& options = {});

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb8&) const = default;
};

// Blue (zero error) to red (saturation and above), black where invalid.
Raster<Rgb8> colorize_error(const AngularErrorMap& m, double saturation_rad);

}  // namespace normal_forge
