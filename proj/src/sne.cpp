#include "normal_forge/sne.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "normal_forge/errors.hpp"
#include "normal_forge/parallel.hpp"

namespace normal_forge {
namespace {

constexpr std::size_t tap(int dx, int dy) {
  return static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
}

double wrap_two_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (angle < 0.0) angle += two_pi;
  if (angle >= two_pi) angle -= two_pi;
  return angle;
}

double correlate(const Raster<double>& img, const Kernel3& kernel, int x, int y) {
  double sum = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double w = kernel[tap(dx, dy)];
      if (w != 0.0) sum += w * img(x + dx, y + dy);
    }
  }
  return sum;
}

// Sign of n . P relative to |P|: -1 facing the camera, +1 facing away, 0 when
// n is tangent to the viewing ray within kTangentEpsilon.
int facing(const Vec3& n, const Point3& p, double p_len) {
  const double c = dot(n, p) / p_len;
  if (c > kTangentEpsilon) return 1;
  if (c < -kTangentEpsilon) return -1;
  return 0;
}

// Fixed orientation for unit vectors tangent to the viewing ray: the first of
// -z, -y, -x with a clearly nonzero component is made positive. Depends only
// on the line through n, so it is unchanged by depth scaling or kernel sign.
Vec3 orient_tangent(const Vec3& n) {
  for (double c : {-n.z, -n.y, -n.x}) {
    if (c > kTangentEpsilon) return n;
    if (c < -kTangentEpsilon) return -n;
  }
  return n;
}

Vec3 toward_camera(const Vec3& n, const Point3& p, double p_len) {
  const int f = facing(n, p, p_len);
  if (f == 0) return orient_tangent(n);
  return f > 0 ? -n : n;
}

// The vertical-surface limit: direction of the gradient with no depth
// component, oriented toward the camera.
Vec3 vertical_limit(double a, double b, const Point3& p, double p_len) {
  return toward_camera(normalized(Vec3{a, b, 0.0}), p, p_len);
}

}  // namespace

GradientFilter GradientFilter::central_difference() {
  GradientFilter f;
  f.kind = FilterKind::kCentralDifference;
  f.kx[tap(-1, 0)] = 1.0;
  f.kx[tap(1, 0)] = -1.0;
  f.ky[tap(0, -1)] = 1.0;
  f.ky[tap(0, 1)] = -1.0;
  return f;
}

GradientFilter GradientFilter::forward_difference() {
  GradientFilter f;
  f.kind = FilterKind::kForwardDifference;
  f.kx[tap(0, 0)] = 1.0;
  f.kx[tap(1, 0)] = -1.0;
  f.ky[tap(0, 0)] = 1.0;
  f.ky[tap(0, 1)] = -1.0;
  return f;
}

GradientFilter GradientFilter::sobel() {
  GradientFilter f;
  f.kind = FilterKind::kSobel;
  f.kx = {0.125, 0.0, -0.125,  //
          0.25,  0.0, -0.25,   //
          0.125, 0.0, -0.125};
  f.ky = {0.125,  0.25,  0.125,  //
          0.0,    0.0,   0.0,    //
          -0.125, -0.25, -0.125};
  return f;
}

GradientFilter GradientFilter::make(FilterKind kind) {
  switch (kind) {
    case FilterKind::kCentralDifference:
      return central_difference();
    case FilterKind::kForwardDifference:
      return forward_difference();
    case FilterKind::kSobel:
      return sobel();
  }
  throw InvalidArgument("unknown filter kind");
}

GradientFilter GradientFilter::negated() const {
  GradientFilter f = *this;
  for (auto& w : f.kx) w = -w;
  for (auto& w : f.ky) w = -w;
  return f;
}

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "central") return FilterKind::kCentralDifference;
  if (name == "forward") return FilterKind::kForwardDifference;
  if (name == "sobel") return FilterKind::kSobel;
  throw InvalidArgument("unknown filter '" + std::string(name) +
                        "' (expected central, forward or sobel)");
}

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kCentralDifference:
      return "central";
    case FilterKind::kForwardDifference:
      return "forward";
    case FilterKind::kSobel:
      return "sobel";
  }
  return "unknown";
}

NeighborhoodSpec::NeighborhoodSpec() : NeighborhoodSpec(connected8()) {}

NeighborhoodSpec::NeighborhoodSpec(std::vector<Offset> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty()) throw InvalidArgument("neighborhood must not be empty");
  for (const auto& o : offsets_) {
    if (o.dx == 0 && o.dy == 0) throw InvalidArgument("neighborhood must not contain (0,0)");
    radius_ = std::max({radius_, std::abs(o.dx), std::abs(o.dy)});
  }
}

NeighborhoodSpec NeighborhoodSpec::connected4() {
  return NeighborhoodSpec({{0, -1}, {-1, 0}, {1, 0}, {0, 1}});
}

NeighborhoodSpec NeighborhoodSpec::connected8() { return square(1); }

NeighborhoodSpec NeighborhoodSpec::square(int radius) {
  if (radius < 1) throw InvalidArgument("neighborhood radius must be >= 1");
  std::vector<Offset> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx != 0 || dy != 0) offsets.push_back({dx, dy});
    }
  }
  return NeighborhoodSpec(std::move(offsets));
}

NeighborhoodSpec NeighborhoodSpec::from_size(int k) {
  switch (k) {
    case 4:
      return connected4();
    case 8:
      return connected8();
    case 24:
      return square(2);
    case 48:
      return square(3);
    default:
      throw InvalidArgument("unsupported neighborhood size " + std::to_string(k) +
                            " (expected 4, 8, 24 or 48)");
  }
}

GradientField compute_gradients(const InverseDepthImage& inv, const GradientFilter& filter) {
  const int w = inv.width();
  const int h = inv.height();
  if (w < 3 || h < 3) {
    throw InvalidArgument("compute_gradients: image must be at least 3x3");
  }
  require_same_shape(inv.inverse, inv.valid, "compute_gradients: data vs mask");

  GradientField g{Raster<double>(w, h, 0.0), Raster<double>(w, h, 0.0), Mask(w, h, 0)};
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (!inv.valid(x, y)) continue;
      bool covered = true;
      for (int dy = -1; dy <= 1 && covered; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t t = tap(dx, dy);
          if ((filter.kx[t] != 0.0 || filter.ky[t] != 0.0) && !inv.valid(x + dx, y + dy)) {
            covered = false;
            break;
          }
        }
      }
      if (!covered) continue;
      g.gx(x, y) = correlate(inv.inverse, filter.kx, x, y);
      g.gy(x, y) = correlate(inv.inverse, filter.ky, x, y);
      g.valid(x, y) = 1;
    }
  }
  return g;
}

CandidateNormal candidate_normal(double gx, double gy, const Vec3& delta,
                                 const CameraIntrinsics& k) {
  if (std::abs(delta.z) < kDepthStepEpsilon) return {};
  const double nx = k.fx * gx;
  const double ny = k.fy * gy;
  const Vec3 n{nx, ny, -(nx * delta.x + ny * delta.y) / delta.z};
  const double len = norm(n);
  if (!(len >= kNormalEpsilon) || !std::isfinite(len)) return {};
  return {n / len, 1};
}

double azimuth(double gx, double gy, const CameraIntrinsics& k) {
  const double a = k.fx * gx;
  const double b = k.fy * gy;
  if (std::abs(a) < kNormalEpsilon && std::abs(b) < kNormalEpsilon) {
    throw DegenerateDirection("azimuth: both scaled gradients vanish");
  }
  return wrap_two_pi(std::atan2(b, a));
}

SphericalDirection optimal_direction(std::span<const CandidateNormal> candidates, double phi) {
  Vec3 sum;
  int used = 0;
  for (const auto& c : candidates) {
    if (c.weight == 0) continue;
    sum += c.vector;
    ++used;
  }
  if (used == 0) {
    throw DegenerateNeighborhood("optimal_direction: no valid candidate normals");
  }
  const double along = sum.x * std::cos(phi) + sum.y * std::sin(phi);
  double theta = std::atan2(along, sum.z);
  if (theta < 0.0) {
    theta = -theta;
    phi += std::numbers::pi;
  }
  return {theta, wrap_two_pi(phi)};
}

double inclination(std::span<const CandidateNormal> candidates, double phi) {
  return optimal_direction(candidates, phi).theta;
}

Vec3 spherical_to_unit(const SphericalDirection& dir) {
  const double s = std::sin(dir.theta);
  return {s * std::cos(dir.phi), s * std::sin(dir.phi), std::cos(dir.theta)};
}

NormalMap estimate_normals(const DepthImage& z, const CameraIntrinsics& k,
                           const EstimateOptions& options) {
  k.validate();
  const int w = z.width();
  const int h = z.height();
  if (w < 3 || h < 3) throw InvalidArgument("estimate_normals: image must be at least 3x3");
  require_same_shape(z.depth, z.valid, "estimate_normals: data vs mask");

  const InverseDepthImage inv = depth_to_inverse(z);
  const GradientField grad = compute_gradients(inv, options.filter);

  Raster<Point3> points(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (inv.valid(x, y)) points(x, y) = backproject_unchecked(x, y, z.depth(x, y), k);
    }
  }

  NormalMap out(w, h);
  const int border = std::max(1, options.neighborhood.radius());
  const auto offsets = options.neighborhood.offsets();

  // theta and phi are evaluated without trigonometry: with
  // (cos phi, sin phi) = (a, b)/|(a, b)| and (sin theta, cos theta) =
  // (A, B)/|(A, B)|, the unit normal is (sin theta cos phi, sin theta sin phi,
  // cos theta). A negative sin theta is the folded (theta, phi + pi) form.
  auto process_rows = [&](int row_begin, int row_end) {
    for (int y = std::max(row_begin, border); y < std::min(row_end, h - border); ++y) {
      for (int x = border; x < w - border; ++x) {
        if (!grad.valid(x, y)) continue;
        const double gx = grad.gx(x, y);
        const double gy = grad.gy(x, y);
        const double a = k.fx * gx;
        const double b = k.fy * gy;
        const Point3& p = points(x, y);
        const double p_len = norm(p);

        Vec3 n;
        if (std::abs(a) < kNormalEpsilon && std::abs(b) < kNormalEpsilon) {
          n = {0.0, 0.0, -1.0};
        } else {
          // Candidates tangent to the viewing ray have no meaningful camera
          // side; they follow the hemisphere of the clear-cut candidates.
          Vec3 sum;
          Vec3 tangent_sum;
          Vec3 tangent_ref;
          int used = 0;
          for (const Offset& o : offsets) {
            const int qx = x + o.dx;
            const int qy = y + o.dy;
            if (!inv.valid(qx, qy)) continue;
            const CandidateNormal c = candidate_normal(gx, gy, points(qx, qy) - p, k);
            if (c.weight == 0) continue;
            ++used;
            const int f = facing(c.vector, p, p_len);
            if (f != 0) {
              sum += f > 0 ? -c.vector : c.vector;
            } else {
              const Vec3 t = orient_tangent(c.vector);
              if (norm(tangent_ref) == 0.0) tangent_ref = t;
              tangent_sum += dot(t, tangent_ref) < 0.0 ? -t : t;
            }
          }
          if (norm(tangent_sum) > 0.0) sum += dot(tangent_sum, sum) < 0.0 ? -tangent_sum : tangent_sum;
          const double r = std::hypot(a, b);
          const double along = sum.x * (a / r) + sum.y * (b / r);
          const double rho = std::hypot(along, sum.z);
          if (used == 0 || !(rho >= kNormalEpsilon)) {
            n = vertical_limit(a, b, p, p_len);
          } else {
            const double sin_theta = along / rho;
            n = toward_camera({sin_theta * (a / r), sin_theta * (b / r), sum.z / rho}, p, p_len);
          }
        }
        out.normals(x, y) = n;
        out.valid(x, y) = 1;
      }
    }
  };
  parallel_rows(h, options.threads, process_rows);
  return out;
}

NormalMap estimate_normals_from_disparity(const DisparityImage& d, const CameraIntrinsics& k,
                                          const EstimateOptions& options) {
  k.validate();
  return estimate_normals(disparity_to_depth(d, k), k, options);
}

}  // namespace normal_forge
