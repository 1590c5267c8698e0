#pragma once

// Brute-force normal estimation by total-least-squares plane fitting. Kept
// independent of the closed-form estimator so the two can cross-check.

#include <array>
#include <span>

#include "normal_forge/camera.hpp"
#include "normal_forge/sne.hpp"
#include "normal_forge/vec3.hpp"

namespace normal_forge {

// Plane n . P + offset = 0 with unit n.
struct PlaneParams {
  Vec3 normal;
  double offset = 0.0;
};

struct SymmetricEigen3 {
  std::array<double, 3> values{};   // ascending
  std::array<Vec3, 3> vectors{};    // unit, vectors[i] pairs with values[i]
};

// Cyclic Jacobi iteration on a symmetric 3x3 matrix (row-major), run until
// the off-diagonal mass is below 1e-12 of the Frobenius norm.
SymmetricEigen3 symmetric_eigen3(const std::array<double, 9>& m);

// Orthogonal-distance plane fit. The normal is flipped so that
// normal . centroid <= 0. Throws RankDeficient for fewer than three points or
// a (near-)collinear set.
PlaneParams plane_fit(std::span<const Point3> points);

// Plane fit over each pixel's window x window neighborhood of valid points.
// Pixels with fewer than 3 usable points, or a degenerate window, stay
// invalid. Orientation follows estimate_normals (n . P <= 0).
NormalMap oracle_normal_map(const DepthImage& z, const CameraIntrinsics& k, int window,
                            int threads = 1);

}  // namespace normal_forge
