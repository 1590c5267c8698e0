#pragma once

// Analytic scenes with exact depth, normal and freespace ground truth.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "normal_forge/camera.hpp"
#include "normal_forge/sne.hpp"

namespace normal_forge {

inline constexpr double kDefaultFarLimit = 200.0;

// Plane normal . P + offset = 0 in the camera frame.
struct PlaneScene {
  Vec3 normal{0.0, 0.0, -1.0};
  double offset = 5.0;
};

struct SphereScene {
  Point3 center{0.0, 0.0, 10.0};
  double radius = 2.0;
};

// Axis-aligned box standing on the ground, in the leveled ground frame
// (X right, Y down, Z forward, origin at the camera).
struct Box {
  double x = 0.0;       // lateral center
  double z = 0.0;       // forward center
  double width = 1.0;   // extent along X
  double length = 1.0;  // extent along Z
  double height = 1.0;  // extent above the ground
};

struct RoadScene {
  double camera_height = 1.5;  // meters above the ground plane
  double pitch = 0.0;          // radians, positive tilts the optical axis down
  std::vector<Box> boxes;
};

using SceneGeometry = std::variant<PlaneScene, SphereScene, RoadScene>;

struct SceneSpec {
  SceneGeometry geometry = PlaneScene{};
  int width = 640;
  int height = 480;
  CameraIntrinsics intrinsics{500.0, 500.0, 320.0, 240.0};
  double far_limit = kDefaultFarLimit;

  void validate() const;
};

struct GroundTruthBundle {
  DepthImage depth;
  NormalMap normals;
  std::optional<Mask> freespace;  // road scenes only
};

SceneSpec default_plane_spec();
SceneSpec default_sphere_spec();
// Ground 1.5 m below the camera, three box obstacles.
SceneSpec default_road_spec();

// Upward unit normal of the road ground plane in the camera frame.
Vec3 ground_normal(const RoadScene& road);

GroundTruthBundle synth_plane(const SceneSpec& spec);
GroundTruthBundle synth_sphere(const SceneSpec& spec);
GroundTruthBundle synth_road(const SceneSpec& spec);
// Dispatches on the geometry kind.
GroundTruthBundle synthesize(const SceneSpec& spec);

// Zero-mean Gaussian depth noise on valid pixels, deterministic per seed. A
// draw that would make a depth non-positive is redrawn, so the mask is
// unchanged.
DepthImage add_noise(const DepthImage& z, double sigma, std::uint64_t seed);

}  // namespace normal_forge
