#include "normal_forge/camera.hpp"

#include <cmath>

namespace normal_forge {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidArgument("focal lengths must be positive and finite");
  }
  if (!std::isfinite(xo) || !std::isfinite(yo)) {
    throw InvalidArgument("principal point must be finite");
  }
}

Point3 backproject(const Pixel& p, double z, const CameraIntrinsics& k) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw InvalidArgument("backproject: depth must be positive and finite");
  }
  return {z * (p.x - k.xo) / k.fx, z * (p.y - k.yo) / k.fy, z};
}

Pixel project(const Point3& point, const CameraIntrinsics& k) {
  if (!(point.z > 0.0)) {
    throw BehindCamera("project: point is not in front of the camera");
  }
  return {k.fx * point.x / point.z + k.xo, k.fy * point.y / point.z + k.yo};
}

DepthImage disparity_to_depth(const DisparityImage& d, const CameraIntrinsics& k) {
  if (!(d.baseline > 0.0)) {
    throw InvalidArgument("disparity_to_depth: baseline must be positive");
  }
  require_same_shape(d.disparity, d.valid, "disparity_to_depth: data vs mask");
  DepthImage out(d.width(), d.height());
  const double scale = k.fx * d.baseline;
  const auto disp = d.disparity.values();
  const auto in_valid = d.valid.values();
  auto depth = out.depth.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (in_valid[i] && disp[i] > 0.0 && std::isfinite(disp[i])) {
      const double z = scale / disp[i];
      if (std::isfinite(z)) {
        depth[i] = z;
        valid[i] = 1;
      }
    }
  }
  return out;
}

DisparityImage depth_to_disparity(const DepthImage& z, const CameraIntrinsics& k,
                                  double baseline) {
  if (!(baseline > 0.0)) {
    throw InvalidArgument("depth_to_disparity: baseline must be positive");
  }
  DisparityImage out(z.width(), z.height(), baseline);
  const double scale = k.fx * baseline;
  const auto depth = z.depth.values();
  const auto in_valid = z.valid.values();
  auto disp = out.disparity.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (in_valid[i] && depth[i] > 0.0 && std::isfinite(depth[i])) {
      disp[i] = scale / depth[i];
      valid[i] = 1;
    }
  }
  return out;
}

InverseDepthImage depth_to_inverse(const DepthImage& z) {
  require_same_shape(z.depth, z.valid, "depth_to_inverse: data vs mask");
  InverseDepthImage out(z.width(), z.height());
  const auto depth = z.depth.values();
  const auto in_valid = z.valid.values();
  auto inv = out.inverse.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (in_valid[i] && depth[i] > 0.0 && std::isfinite(depth[i])) {
      inv[i] = 1.0 / depth[i];
      valid[i] = 1;
    }
  }
  return out;
}

}  // namespace normal_forge
