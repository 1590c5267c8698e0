#include "normal_forge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "normal_forge/errors.hpp"

namespace normal_forge {

double angular_error(const Vec3& n, const Vec3& n_hat, bool sign_invariant) {
  const double len = norm(n) * norm(n_hat);
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw InvalidArgument("angular_error: vectors must be nonzero and finite");
  }
  const double e = std::acos(std::clamp(dot(n, n_hat) / len, -1.0, 1.0));
  return sign_invariant ? std::min(e, std::numbers::pi - e) : e;
}

AngularErrorMap aae(const NormalMap& gt, const NormalMap& pred, bool sign_invariant) {
  require_same_shape(gt.normals, pred.normals, "aae");
  AngularErrorMap out{Raster<double>(gt.width(), gt.height(), 0.0),
                      Mask(gt.width(), gt.height(), 0), 0.0, 0};
  double sum = 0.0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!gt.valid(x, y) || !pred.valid(x, y)) continue;
      const double e = angular_error(gt.normals(x, y), pred.normals(x, y), sign_invariant);
      out.error(x, y) = e;
      out.valid(x, y) = 1;
      sum += e;
      ++out.count;
    }
  }
  if (out.count == 0) throw EmptyEvaluation("aae: no jointly valid pixels");
  out.mean = sum / static_cast<double>(out.count);
  return out;
}

double median_error(const AngularErrorMap& m) {
  std::vector<double> values;
  values.reserve(m.count);
  const auto err = m.error.values();
  const auto valid = m.valid.values();
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (valid[i]) values.push_back(err[i]);
  }
  if (values.empty()) throw EmptyEvaluation("median_error: no valid pixels");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

ConfusionCounts confusion(const Mask& pred, const Mask& gt, const Mask& valid) {
  require_same_shape(pred, gt, "confusion: pred vs gt");
  require_same_shape(pred, valid, "confusion: pred vs valid");
  ConfusionCounts c;
  const auto p = pred.values();
  const auto g = gt.values();
  const auto v = valid.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!v[i]) continue;
    if (p[i] && g[i]) {
      ++c.tp;
    } else if (!p[i] && !g[i]) {
      ++c.tn;
    } else if (p[i]) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

SegmentationScores scores(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyEvaluation("scores: all confusion counts are zero");
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0.0) return std::nullopt;
    return num / den;
  };
  SegmentationScores s;
  s.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.fscore = ratio(2.0 * tp * tp, 2.0 * tp * tp + tp * (fp + fn));
  s.iou = ratio(tp, tp + fp + fn);
  return s;
}

Mask normal_freespace(const NormalMap& nm, const FreespaceOptions& options) {
  if (!is_finite(options.up) || std::abs(norm(options.up) - 1.0) > 1e-6) {
    throw InvalidArgument("normal_freespace: up must be a unit vector");
  }
  if (!(options.max_angle > 0.0) || !(options.max_angle < 0.5 * std::numbers::pi)) {
    throw InvalidArgument("normal_freespace: max_angle must lie in (0, pi/2)");
  }
  const int w = nm.width();
  const int h = nm.height();
  Mask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (nm.valid(x, y) && angular_error(nm.normals(x, y), options.up, true) <= options.max_angle) {
        out(x, y) = 1;
      }
    }
  }
  if (!options.largest_component) return out;

  // Label 4-connected components with an explicit stack; keep the largest.
  Raster<int> label(w, h, -1);
  std::vector<std::pair<int, int>> stack;
  int best_label = -1;
  std::size_t best_size = 0;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out(x, y) || label(x, y) >= 0) continue;
      std::size_t size = 0;
      label(x, y) = next;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        constexpr int dxs[4] = {1, -1, 0, 0};
        constexpr int dys[4] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
          const int nx = cx + dxs[i];
          const int ny = cy + dys[i];
          if (out.contains(nx, ny) && out(nx, ny) && label(nx, ny) < 0) {
            label(nx, ny) = next;
            stack.push_back({nx, ny});
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = (label(x, y) == best_label && best_label >= 0) ? 1 : 0;
  }
  return out;
}

Raster<Rgb8> colorize_error(const AngularErrorMap& m, double saturation_rad) {
  if (!(saturation_rad > 0.0)) throw InvalidArgument("colorize_error: saturation must be positive");
  Raster<Rgb8> out(m.error.width(), m.error.height());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!m.valid(x, y)) continue;
      const double t = std::min(m.error(x, y) / saturation_rad, 1.0);
      const auto level = static_cast<std::uint8_t>(std::lround(255.0 * t));
      out(x, y) = {level, 0, static_cast<std::uint8_t>(255 - level)};
    }
  }
  return out;
}

}  // namespace normal_forge
