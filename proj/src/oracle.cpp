#include "normal_forge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "normal_forge/errors.hpp"
#include "normal_forge/parallel.hpp"

namespace normal_forge {
namespace {

constexpr double kJacobiTolerance = 1e-12;
constexpr int kJacobiMaxSweeps = 64;
// Second-smallest eigenvalue relative to the largest below which the point
// set is treated as collinear.
constexpr double kRankTolerance = 1e-12;

}  // namespace

SymmetricEigen3 symmetric_eigen3(const std::array<double, 9>& m) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  double frob = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      a[i][j] = m[static_cast<std::size_t>(i * 3 + j)];
      frob += a[i][j] * a[i][j];
    }
  }
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    const double off = std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]));
    if (off <= kJacobiTolerance * frob || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int r = 0; r < 3; ++r) {
          const double arp = a[r][p];
          const double arq = a[r][q];
          a[r][p] = c * arp - s * arq;
          a[r][q] = s * arp + c * arq;
        }
        for (int r = 0; r < 3; ++r) {
          const double apr = a[p][r];
          const double aqr = a[q][r];
          a[p][r] = c * apr - s * aqr;
          a[q][r] = s * apr + c * aqr;
        }
        for (int r = 0; r < 3; ++r) {
          const double vrp = v[r][p];
          const double vrq = v[r][q];
          v[r][p] = c * vrp - s * vrq;
          v[r][q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
  SymmetricEigen3 out;
  for (std::size_t i = 0; i < 3; ++i) {
    const int c = order[i];
    out.values[i] = a[c][c];
    out.vectors[i] = normalized(Vec3{v[0][c], v[1][c], v[2][c]});
  }
  return out;
}

PlaneParams plane_fit(std::span<const Point3> points) {
  if (points.size() < 3) throw RankDeficient("plane_fit: need at least 3 points");

  Vec3 centroid;
  for (const auto& p : points) centroid += p;
  centroid = centroid / static_cast<double>(points.size());

  std::array<double, 9> cov{};
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov[0] += d.x * d.x;
    cov[1] += d.x * d.y;
    cov[2] += d.x * d.z;
    cov[4] += d.y * d.y;
    cov[5] += d.y * d.z;
    cov[8] += d.z * d.z;
  }
  cov[3] = cov[1];
  cov[6] = cov[2];
  cov[7] = cov[5];

  const SymmetricEigen3 eig = symmetric_eigen3(cov);
  if (!(eig.values[2] > 0.0) || eig.values[1] <= kRankTolerance * eig.values[2]) {
    throw RankDeficient("plane_fit: points are collinear or coincident");
  }

  Vec3 n = eig.vectors[0];
  if (dot(n, centroid) > 0.0) n = -n;
  return {n, -dot(n, centroid)};
}

NormalMap oracle_normal_map(const DepthImage& z, const CameraIntrinsics& k, int window,
                            int threads) {
  k.validate();
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgument("oracle_normal_map: window must be odd and >= 3");
  }
  require_same_shape(z.depth, z.valid, "oracle_normal_map: data vs mask");
  const int w = z.width();
  const int h = z.height();
  const int half = window / 2;
  NormalMap out(w, h);

  auto usable = [&](int x, int y) {
    return z.valid(x, y) && z.depth(x, y) > 0.0 && std::isfinite(z.depth(x, y));
  };

  parallel_rows(h, threads, [&](int row_begin, int row_end) {
    std::vector<Point3> pts;
    pts.reserve(static_cast<std::size_t>(window * window));
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!usable(x, y)) continue;
        pts.clear();
        for (int dy = -half; dy <= half; ++dy) {
          for (int dx = -half; dx <= half; ++dx) {
            const int qx = x + dx;
            const int qy = y + dy;
            if (z.depth.contains(qx, qy) && usable(qx, qy)) {
              pts.push_back(backproject_unchecked(qx, qy, z.depth(qx, qy), k));
            }
          }
        }
        if (pts.size() < 3) continue;
        try {
          Vec3 n = plane_fit(pts).normal;
          const Point3 p = backproject_unchecked(x, y, z.depth(x, y), k);
          if (dot(n, p) > 0.0) n = -n;
          out.normals(x, y) = n;
          out.valid(x, y) = 1;
        } catch (const RankDeficient&) {
        }
      }
    }
  });
  return out;
}

}  // namespace normal_forge
