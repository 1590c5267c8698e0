#pragma once

// Closed-form surface normal estimation from depth or disparity images.
//
// Pipeline per pixel: inverse depth -> horizontal/vertical gradients ->
// one candidate normal per neighbor -> hemisphere alignment -> azimuth from
// the gradients and the inclination that maximizes the summed cosine to the
// candidates -> unit normal oriented toward the camera.

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "normal_forge/camera.hpp"
#include "normal_forge/raster.hpp"
#include "normal_forge/vec3.hpp"

namespace normal_forge {

// |dZ| below this skips a candidate (meters).
inline constexpr double kDepthStepEpsilon = 1e-6;
// Scaled gradients or candidate vectors below this are treated as zero.
inline constexpr double kNormalEpsilon = 1e-12;
// |n . P| / |P| below this means n is tangent to the viewing ray, where the
// camera-facing side is decided by a fixed rule instead of the sign of a
// rounding error.
inline constexpr double kTangentEpsilon = 1e-10;

enum class FilterKind { kCentralDifference, kForwardDifference, kSobel };

// 3x3 correlation kernel, row-major, tap (dx, dy) at [(dy + 1) * 3 + (dx + 1)].
using Kernel3 = std::array<double, 9>;

// Horizontal/vertical gradient kernel pair. All built-in kernels share the
// backward-minus-forward sign, so they estimate a negative multiple of the
// true derivative; the sign and scale cancel in the final normal.
struct GradientFilter {
  FilterKind kind = FilterKind::kCentralDifference;
  Kernel3 kx{};
  Kernel3 ky{};

  // gx = I(x-1, y) - I(x+1, y), gy = I(x, y-1) - I(x, y+1).
  static GradientFilter central_difference();
  // gx = I(x, y) - I(x+1, y), gy = I(x, y) - I(x, y+1).
  static GradientFilter forward_difference();
  // Sobel scaled by 1/8, i.e. unit-magnitude negative derivative.
  static GradientFilter sobel();
  static GradientFilter make(FilterKind kind);

  GradientFilter negated() const;
};

FilterKind parse_filter_kind(std::string_view name);
std::string_view to_string(FilterKind kind);

struct Offset {
  int dx = 0;
  int dy = 0;
  bool operator==(const Offset&) const = default;
};

// Ordered neighbor offsets. Iteration order fixes the candidate summation
// order, which keeps output bit-identical across runs.
class NeighborhoodSpec {
 public:
  // Default: 8-connected ring in row-major order.
  NeighborhoodSpec();
  explicit NeighborhoodSpec(std::vector<Offset> offsets);

  static NeighborhoodSpec connected4();
  static NeighborhoodSpec connected8();
  // Every offset in the (2r+1)^2 square except the center.
  static NeighborhoodSpec square(int radius);
  // 4 -> connected4, 8 -> connected8, 24 -> square(2), 48 -> square(3).
  static NeighborhoodSpec from_size(int k);

  std::span<const Offset> offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  int radius() const noexcept { return radius_; }

 private:
  std::vector<Offset> offsets_;
  int radius_ = 0;
};

struct GradientField {
  Raster<double> gx;
  Raster<double> gy;
  Mask valid;

  int width() const noexcept { return gx.width(); }
  int height() const noexcept { return gx.height(); }
};

struct CandidateNormal {
  Vec3 vector;
  int weight = 0;  // 1 = usable, 0 = skipped or degenerate
};

struct SphericalDirection {
  double theta = 0.0;  // inclination in [0, pi]
  double phi = 0.0;    // azimuth in [0, 2 pi)
};

struct NormalMap {
  Raster<Vec3> normals;
  Mask valid;

  NormalMap() = default;
  NormalMap(int width, int height) : normals(width, height, Vec3{}), valid(width, height, 0) {}

  int width() const noexcept { return normals.width(); }
  int height() const noexcept { return normals.height(); }
};

GradientField compute_gradients(const InverseDepthImage& inv, const GradientFilter& filter);

// Candidate normal implied by the center pixel's gradients and one neighbor's
// displacement delta = Q - P. Normalized when weight = 1.
CandidateNormal candidate_normal(double gx, double gy, const Vec3& delta,
                                 const CameraIntrinsics& k);

// Full-quadrant angle of (fx gx, fy gy) in [0, 2 pi). Throws
// DegenerateDirection when both components are below kNormalEpsilon.
double azimuth(double gx, double gy, const CameraIntrinsics& k);

// Inclination/azimuth pair maximizing sum_i n(theta, phi) . c_i over theta for
// the given azimuth, over weight = 1 candidates. When the maximizer lies at a
// negative inclination the pair is reported as (-theta, phi + pi), which is
// the same direction with theta in [0, pi]. Throws DegenerateNeighborhood
// when no candidate has weight 1.
SphericalDirection optimal_direction(std::span<const CandidateNormal> candidates, double phi);

// optimal_direction(candidates, phi).theta.
double inclination(std::span<const CandidateNormal> candidates, double phi);

Vec3 spherical_to_unit(const SphericalDirection& dir);

struct EstimateOptions {
  GradientFilter filter = GradientFilter::central_difference();
  NeighborhoodSpec neighborhood;
  int threads = 1;
};

// Valid output pixels are unit length and satisfy n . P <= kTangentEpsilon |P|.
// Pixels within the border band (filter or neighborhood half-width) stay
// invalid.
NormalMap estimate_normals(const DepthImage& z, const CameraIntrinsics& k,
                           const EstimateOptions& options = {});

NormalMap estimate_normals_from_disparity(const DisparityImage& d, const CameraIntrinsics& k,
                                          const EstimateOptions& options = {});

}  // namespace normal_forge
