#include "normal_forge/scene.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "normal_forge/errors.hpp"

namespace normal_forge {
namespace {

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal;
  bool ground = false;
};

// Rotation about X taking camera-frame vectors to the leveled ground frame.
struct Pitch {
  double c = 1.0;
  double s = 0.0;

  Vec3 to_ground(const Vec3& v) const { return {v.x, c * v.y + s * v.z, -s * v.y + c * v.z}; }
  Vec3 to_camera(const Vec3& v) const { return {v.x, c * v.y - s * v.z, s * v.y + c * v.z}; }
};

Vec3 ray_direction(int x, int y, const CameraIntrinsics& k) {
  return {(x - k.xo) / k.fx, (y - k.yo) / k.fy, 1.0};
}

// Slab test against an axis-aligned box in the ground frame. Only entry hits
// count; the camera is never inside a box.
void intersect_box(const Box& box, double ground_y, const Vec3& dir, Hit& best) {
  const double lo[3] = {box.x - 0.5 * box.width, ground_y - box.height, box.z - 0.5 * box.length};
  const double hi[3] = {box.x + 0.5 * box.width, ground_y, box.z + 0.5 * box.length};
  const double d[3] = {dir.x, dir.y, dir.z};
  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = -1;
  double enter_sign = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (0.0 < lo[axis] || 0.0 > hi[axis]) return;
      continue;
    }
    double t0 = lo[axis] / d[axis];
    double t1 = hi[axis] / d[axis];
    double sign = -1.0;  // entering through the low face
    if (t0 > t1) {
      std::swap(t0, t1);
      sign = 1.0;
    }
    if (t0 > t_enter) {
      t_enter = t0;
      enter_axis = axis;
      enter_sign = sign;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (enter_axis < 0 || t_enter > t_exit || !(t_enter > 0.0) || t_enter >= best.t) return;
  Vec3 n;
  if (enter_axis == 0) n.x = enter_sign;
  if (enter_axis == 1) n.y = enter_sign;
  if (enter_axis == 2) n.z = enter_sign;
  best = {t_enter, n, false};
}

GroundTruthBundle empty_bundle(const SceneSpec& spec) {
  return {DepthImage(spec.width, spec.height), NormalMap(spec.width, spec.height), std::nullopt};
}

void require_visible(const GroundTruthBundle& b) {
  for (auto v : b.depth.valid.values()) {
    if (v) return;
  }
  throw EmptyScene("scene produces no valid depth pixel");
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw InvalidArgument("scene: image size must be positive");
  intrinsics.validate();
  if (!(far_limit > 0.0)) throw InvalidArgument("scene: far limit must be positive");
  if (const auto* plane = std::get_if<PlaneScene>(&geometry)) {
    if (!is_finite(plane->normal) || !(norm(plane->normal) > 0.0) ||
        !std::isfinite(plane->offset)) {
      throw InvalidArgument("plane scene: normal must be nonzero and finite");
    }
    if (plane->offset == 0.0) throw InvalidArgument("plane scene: plane passes through the camera");
  } else if (const auto* sphere = std::get_if<SphereScene>(&geometry)) {
    if (!(sphere->radius > 0.0)) throw InvalidArgument("sphere scene: radius must be positive");
    if (!(sphere->center.z > 0.0) || !(norm(sphere->center) > sphere->radius)) {
      throw InvalidArgument("sphere scene: sphere must lie in front of the camera");
    }
  } else if (const auto* road = std::get_if<RoadScene>(&geometry)) {
    if (!(road->camera_height > 0.0)) {
      throw InvalidArgument("road scene: camera must be above the ground plane");
    }
    for (const Box& b : road->boxes) {
      if (!(b.width > 0.0) || !(b.length > 0.0) || !(b.height > 0.0)) {
        throw InvalidArgument("road scene: box extents must be positive");
      }
      const bool covers_camera = std::abs(b.x) <= 0.5 * b.width &&
                                 std::abs(b.z) <= 0.5 * b.length && b.height >= road->camera_height;
      if (covers_camera) throw InvalidArgument("road scene: box contains the camera");
    }
  }
}

SceneSpec default_plane_spec() {
  SceneSpec spec;
  spec.geometry = PlaneScene{{0.0, -0.8, -0.6}, 6.0};
  return spec;
}

SceneSpec default_sphere_spec() {
  SceneSpec spec;
  spec.geometry = SphereScene{{0.0, 0.0, 10.0}, 2.0};
  return spec;
}

SceneSpec default_road_spec() {
  SceneSpec spec;
  RoadScene road;
  road.camera_height = 1.5;
  road.boxes = {
      {-3.5, 12.0, 2.0, 4.5, 2.5},
      {3.2, 18.0, 2.2, 5.0, 3.0},
      {-0.5, 35.0, 2.5, 6.0, 3.2},
  };
  spec.geometry = road;
  return spec;
}

Vec3 ground_normal(const RoadScene& road) {
  const Pitch pitch{std::cos(road.pitch), std::sin(road.pitch)};
  return pitch.to_camera({0.0, -1.0, 0.0});
}

GroundTruthBundle synth_plane(const SceneSpec& spec) {
  spec.validate();
  PlaneScene plane = std::get<PlaneScene>(spec.geometry);
  const double len = norm(plane.normal);
  plane.normal = plane.normal / len;
  plane.offset /= len;
  // Orient toward the camera: points on the plane satisfy n . P = -offset.
  if (plane.offset < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
  const CameraIntrinsics& k = spec.intrinsics;
  const Vec3& n = plane.normal;

  GroundTruthBundle out = empty_bundle(spec);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double inv =
          -(n.x * (x - k.xo) / k.fx + n.y * (y - k.yo) / k.fy + n.z) / plane.offset;
      if (!(inv > 0.0)) continue;
      const double z = 1.0 / inv;
      if (!(z <= spec.far_limit)) continue;
      out.depth.set(x, y, z);
      out.normals.normals(x, y) = n;
      out.normals.valid(x, y) = 1;
    }
  }
  require_visible(out);
  return out;
}

GroundTruthBundle synth_sphere(const SceneSpec& spec) {
  spec.validate();
  const SphereScene& sphere = std::get<SphereScene>(spec.geometry);
  const Point3& c = sphere.center;
  const double dist = norm(c);
  const double cc = (dist - sphere.radius) * (dist + sphere.radius);

  GroundTruthBundle out = empty_bundle(spec);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Vec3 r = ray_direction(x, y, spec.intrinsics);
      const double a = dot(r, r);
      const double b = dot(r, c);
      const double disc = b * b - a * cc;
      if (disc < 0.0 || b <= 0.0) continue;
      // Near root of a t^2 - 2 b t + cc = 0 in cancellation-free form.
      const double t = cc / (b + std::sqrt(disc));
      if (!(t > 0.0) || !(t <= spec.far_limit)) continue;
      Vec3 n = (r * t - c) / sphere.radius;
      n = normalized(n);
      if (dot(n, r) > 0.0) n = -n;
      out.depth.set(x, y, t);
      out.normals.normals(x, y) = n;
      out.normals.valid(x, y) = 1;
    }
  }
  require_visible(out);
  return out;
}

GroundTruthBundle synth_road(const SceneSpec& spec) {
  spec.validate();
  const RoadScene& road = std::get<RoadScene>(spec.geometry);
  const Pitch pitch{std::cos(road.pitch), std::sin(road.pitch)};

  GroundTruthBundle out = empty_bundle(spec);
  out.freespace = Mask(spec.width, spec.height, 0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Vec3 dir = pitch.to_ground(ray_direction(x, y, spec.intrinsics));
      Hit best;
      if (dir.y > 0.0) best = {road.camera_height / dir.y, {0.0, -1.0, 0.0}, true};
      for (const Box& box : road.boxes) intersect_box(box, road.camera_height, dir, best);
      if (!std::isfinite(best.t) || !(best.t <= spec.far_limit)) continue;
      // Camera-frame ray has unit z, so the ray parameter is the Z-depth.
      out.depth.set(x, y, best.t);
      out.normals.normals(x, y) = pitch.to_camera(best.normal);
      out.normals.valid(x, y) = 1;
      (*out.freespace)(x, y) = best.ground ? 1 : 0;
    }
  }
  require_visible(out);
  return out;
}

GroundTruthBundle synthesize(const SceneSpec& spec) {
  return std::visit(
      [&](const auto& g) -> GroundTruthBundle {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, PlaneScene>) return synth_plane(spec);
        if constexpr (std::is_same_v<T, SphereScene>) return synth_sphere(spec);
        if constexpr (std::is_same_v<T, RoadScene>) return synth_road(spec);
      },
      spec.geometry);
}

DepthImage add_noise(const DepthImage& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("add_noise: sigma must be non-negative");
  }
  DepthImage out = z;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  auto depth = out.depth.values();
  const auto valid = out.valid.values();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!valid[i]) continue;
    double v = depth[i] + noise(rng);
    while (!(v > 0.0)) v = depth[i] + noise(rng);
    depth[i] = v;
  }
  return out;
}

}  // namespace normal_forge
