#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "normal_forge/eval.hpp"
#include "normal_forge/scene.hpp"
#include "normal_forge/sne.hpp"
#include "support.hpp"

using namespace normal_forge;
using nf_test::kDeg;

namespace {

NormalMap filled(int w, int h, const Vec3& n) {
  NormalMap nm(w, h);
  for (auto& v : nm.normals.values()) v = n;
  for (auto& v : nm.valid.values()) v = 1;
  return nm;
}

Mask checkerboard(int w, int h) {
  Mask m(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(x, y) = ((x + y) % 2 == 0) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("angular_error examples") {
  CHECK(angular_error({0, 0, 1}, {0, 0, 1}) == 0.0);
  CHECK(angular_error({1, 0, 0}, {0, 1, 0}) == doctest::Approx(std::numbers::pi / 2));
  CHECK(angular_error({0, 0, 1}, {0, std::sin(10 * kDeg), std::cos(10 * kDeg)}) ==
        doctest::Approx(10 * kDeg).epsilon(1e-12));
  CHECK(angular_error({0, 0, 1}, {0, 0, -1}) == doctest::Approx(std::numbers::pi));
  CHECK(angular_error({0, 0, 1}, {0, 0, -1}, true) == doctest::Approx(0.0));
  CHECK(angular_error({1, 1, 1}, {1, 1, 1.0000000001}) >= 0.0);  // clamped, no NaN
  CHECK_THROWS_AS(angular_error({0, 0, 0}, {0, 0, 1}), InvalidArgument);
  CHECK_THROWS_AS(angular_error({0, 0, 1}, {0, 0, 0}), InvalidArgument);
}

TEST_CASE("angular_error properties") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 a = nf_test::random_unit(rng), b = nf_test::random_unit(rng);
    const double e = angular_error(a, b);
    CHECK(e >= 0.0);
    CHECK(e <= std::numbers::pi);
    CHECK(e == doctest::Approx(angular_error(b, a)).epsilon(1e-12));
    CHECK(e == doctest::Approx(angular_error(a * scale(rng), b * scale(rng))).epsilon(1e-9));
    CHECK(std::abs(e - nf_test::frame_angle(a, b)) < 1e-7);
    CHECK(angular_error(a, b, true) == doctest::Approx(std::min(e, std::numbers::pi - e)));
  }
}

TEST_CASE("aae") {
  const NormalMap gt = filled(8, 6, normalized(Vec3{0.2, -0.5, -1}));
  CHECK(aae(gt, gt).mean == 0.0);
  CHECK(aae(gt, gt).count == 48);

  NormalMap flipped = gt;
  for (auto& v : flipped.normals.values()) v = -v;
  CHECK(aae(gt, flipped, true).mean == doctest::Approx(0.0));
  CHECK(aae(gt, flipped).mean == doctest::Approx(std::numbers::pi));

  NormalMap partial = filled(8, 6, {0, 0, -1});
  partial.valid(0, 0) = 0;
  partial.normals(1, 0) = {0, std::sin(0.3), -std::cos(0.3)};
  NormalMap base = filled(8, 6, {0, 0, -1});
  base.valid(2, 0) = 0;
  const AngularErrorMap e = aae(base, partial);
  CHECK(e.count == 46);
  CHECK(e.valid(0, 0) == 0);
  CHECK(e.valid(2, 0) == 0);
  CHECK(e.mean == doctest::Approx(0.3 / 46));
  CHECK(median_error(e) == doctest::Approx(0.0));

  CHECK_THROWS_AS(aae(gt, filled(8, 5, {0, 0, -1})), DimensionMismatch);
  NormalMap none(8, 6);
  CHECK_THROWS_AS(aae(gt, none), EmptyEvaluation);

  SUBCASE("SNE on a noise-free slanted plane") {
    const SceneSpec spec = default_plane_spec();
    const GroundTruthBundle truth = synth_plane(spec);
    CHECK(aae(truth.normals, estimate_normals(truth.depth, spec.intrinsics)).mean < 0.5 * kDeg);
  }
}

TEST_CASE("confusion") {
  const Mask gt = checkerboard(4, 4);
  const Mask all(4, 4, 1);
  const ConfusionCounts c = confusion(all, gt, all);
  CHECK(c == ConfusionCounts{8, 0, 8, 0});

  const ConfusionCounts same = confusion(gt, gt, all);
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  Mask inverted = gt;
  for (auto& v : inverted.values()) v = v ? 0 : 1;
  const ConfusionCounts opposite = confusion(inverted, gt, all);
  CHECK(opposite.tp == 0);
  CHECK(opposite.tn == 0);

  Mask valid = all;
  valid(0, 0) = 0;
  CHECK(confusion(all, gt, valid).total() == 15);
  CHECK_THROWS_AS(confusion(all, Mask(4, 5, 0), all), DimensionMismatch);

  SUBCASE("additive over disjoint regions") {
    std::mt19937_64 rng(1);
    std::bernoulli_distribution coin(0.5);
    Mask pred(20, 10, 0), truth(20, 10, 0), left(20, 10, 0), right(20, 10, 0);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 20; ++x) {
        pred(x, y) = coin(rng);
        truth(x, y) = coin(rng);
        (x < 7 ? left : right)(x, y) = 1;
      }
    }
    ConfusionCounts sum = confusion(pred, truth, left);
    sum += confusion(pred, truth, right);
    CHECK(sum == confusion(pred, truth, Mask(20, 10, 1)));
  }
}

TEST_CASE("scores") {
  const SegmentationScores s = scores({3, 5, 1, 1});
  CHECK(*s.accuracy == doctest::Approx(0.8));
  CHECK(*s.precision == doctest::Approx(0.75));
  CHECK(*s.recall == doctest::Approx(0.75));
  CHECK(*s.fscore == doctest::Approx(0.75));
  CHECK(*s.iou == doctest::Approx(0.6));

  const SegmentationScores perfect = scores({7, 4, 0, 0});
  for (const auto& v : {perfect.accuracy, perfect.precision, perfect.recall, perfect.fscore,
                        perfect.iou})
    CHECK(*v == 1.0);

  const SegmentationScores miss = scores({0, 2, 3, 4});
  CHECK(*miss.precision == 0.0);
  CHECK(*miss.recall == 0.0);
  CHECK(*miss.iou == 0.0);
  CHECK(!miss.fscore);

  const SegmentationScores negatives = scores({0, 9, 0, 0});
  CHECK(*negatives.accuracy == 1.0);
  CHECK(!negatives.precision);
  CHECK(!negatives.recall);
  CHECK(!negatives.iou);

  CHECK_THROWS_AS(scores({}), EmptyEvaluation);

  SUBCASE("IoU <= F-score, F-score is the harmonic mean") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> count(0, 50);
    for (int i = 0; i < 2000; ++i) {
      const ConfusionCounts c{std::uint64_t(count(rng)), std::uint64_t(count(rng)),
                              std::uint64_t(count(rng)), std::uint64_t(count(rng))};
      if (c.total() == 0) continue;
      const SegmentationScores r = scores(c);
      for (const auto& v : {r.accuracy, r.precision, r.recall, r.fscore, r.iou}) {
        if (!v) continue;
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
      }
      if (r.fscore && r.iou) CHECK(*r.iou <= *r.fscore + 1e-15);
      if (r.fscore && r.precision && r.recall && *r.precision + *r.recall > 0) {
        const double hm = 2 * *r.precision * *r.recall / (*r.precision + *r.recall);
        CHECK(*r.fscore == doctest::Approx(hm).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normal_freespace") {
  const SceneSpec spec = default_road_spec();
  const GroundTruthBundle gt = synth_road(spec);
  const RoadScene& road = std::get<RoadScene>(spec.geometry);

  SUBCASE("exact normals: ground positive, box sides negative") {
    FreespaceOptions opt;
    opt.up = ground_normal(road);
    opt.max_angle = 5 * kDeg;
    opt.largest_component = false;
    const Mask m = normal_freespace(gt.normals, opt);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if ((*gt.freespace)(x, y)) REQUIRE(m(x, y) == 1);
        const Vec3 n = gt.normals.normals(x, y);
        if (gt.normals.valid(x, y) && std::abs(n.y) < 1e-12) REQUIRE(m(x, y) == 0);
        if (!gt.normals.valid(x, y)) REQUIRE(m(x, y) == 0);
      }
    }
  }
  SUBCASE("SNE normals reproduce the freespace mask") {
    const Mask m = normal_freespace(estimate_normals(gt.depth, spec.intrinsics));
    const SegmentationScores s = scores(confusion(m, *gt.freespace, gt.depth.valid));
    CHECK(*s.iou > 0.95);
  }
  SUBCASE("largest component") {
    NormalMap nm = filled(9, 5, {0, -1, 0});
    for (int y = 0; y < 5; ++y) nm.normals(4, y) = {0, 0, -1};  // wall splits 4 | 4
    nm.normals(8, 0) = {0, 0, -1};                              // right part loses a pixel
    FreespaceOptions opt;
    const Mask m = normal_freespace(nm, opt);
    int left = 0, right = 0;
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 9; ++x) (x < 4 ? left : right) += m(x, y);
    CHECK(left == 20);
    CHECK(right == 0);
    opt.largest_component = false;
    const Mask all = normal_freespace(nm, opt);
    CHECK(all(8, 1) == 1);
    CHECK(all(4, 2) == 0);
  }
  SUBCASE("sign-invariant angle test") {
    const Mask m = normal_freespace(filled(3, 3, {0, 1, 0}));
    for (auto v : m.values()) CHECK(v == 1);
  }
  SUBCASE("parameter validation") {
    FreespaceOptions bad;
    bad.up = {0, -2, 0};
    CHECK_THROWS_AS(normal_freespace(gt.normals, bad), InvalidArgument);
    bad = {};
    bad.max_angle = 0.0;
    CHECK_THROWS_AS(normal_freespace(gt.normals, bad), InvalidArgument);
    bad.max_angle = std::numbers::pi / 2;
    CHECK_THROWS_AS(normal_freespace(gt.normals, bad), InvalidArgument);
  }
}

TEST_CASE("colorize_error") {
  AngularErrorMap m;
  m.error = Raster<double>(3, 1, 0.0);
  m.valid = Mask(3, 1, 1);
  m.error(1, 0) = 1.0;
  m.valid(2, 0) = 0;
  const Raster<Rgb8> img = colorize_error(m, 0.5);
  CHECK(img(0, 0) == Rgb8{0, 0, 255});
  CHECK(img(1, 0) == Rgb8{255, 0, 0});
  CHECK(img(2, 0) == Rgb8{0, 0, 0});
  CHECK_THROWS_AS(colorize_error(m, 0.0), InvalidArgument);
}
