#pragma once

#include "normal_forge/raster.hpp"
#include "normal_forge/vec3.hpp"

namespace normal_forge {

// Pinhole intrinsics. Pixel coordinates are continuous, with integer values
// at pixel centers.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double xo = 0.0;
  double yo = 0.0;

  // Throws InvalidArgument unless fx, fy > 0 and the principal point is finite.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

struct Pixel {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Pixel&) const = default;
};

// Z-depth (distance along the optical axis), not range along the ray.
struct DepthImage {
  Raster<double> depth;
  Mask valid;

  DepthImage() = default;
  DepthImage(int width, int height) : depth(width, height, 0.0), valid(width, height, 0) {}

  int width() const noexcept { return depth.width(); }
  int height() const noexcept { return depth.height(); }

  void set(int x, int y, double z) {
    depth(x, y) = z;
    valid(x, y) = 1;
  }
};

struct InverseDepthImage {
  Raster<double> inverse;
  Mask valid;

  InverseDepthImage() = default;
  InverseDepthImage(int width, int height)
      : inverse(width, height, 0.0), valid(width, height, 0) {}

  int width() const noexcept { return inverse.width(); }
  int height() const noexcept { return inverse.height(); }
};

struct DisparityImage {
  Raster<double> disparity;
  Mask valid;
  double baseline = 0.0;  // meters

  DisparityImage() = default;
  DisparityImage(int width, int height, double baseline_m)
      : disparity(width, height, 0.0), valid(width, height, 0), baseline(baseline_m) {}

  int width() const noexcept { return disparity.width(); }
  int height() const noexcept { return disparity.height(); }
};

Point3 backproject(const Pixel& p, double z, const CameraIntrinsics& k);
Pixel project(const Point3& point, const CameraIntrinsics& k);

// Unchecked backprojection of an integer pixel, for per-pixel kernels that
// already know z > 0.
inline Point3 backproject_unchecked(int x, int y, double z, const CameraIntrinsics& k) {
  return {z * (x - k.xo) / k.fx, z * (y - k.yo) / k.fy, z};
}

// Z = fx * baseline / disparity on valid pixels; zero or non-finite disparity
// becomes an invalid depth pixel.
DepthImage disparity_to_depth(const DisparityImage& d, const CameraIntrinsics& k);

// Inverse of disparity_to_depth: disparity = fx * baseline / Z.
DisparityImage depth_to_disparity(const DepthImage& z, const CameraIntrinsics& k,
                                  double baseline);

InverseDepthImage depth_to_inverse(const DepthImage& z);

}  // namespace normal_forge
