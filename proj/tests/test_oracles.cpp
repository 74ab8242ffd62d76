#include <doctest.h>

#include <cmath>

#include "adseval/errors.hpp"
#include "adseval/geom3d.hpp"
#include "adseval/testkit/oracles.hpp"
#include "adseval/testkit/synth.hpp"

using namespace adseval;

namespace {

Box3D slab(double x, double y, double z, double yaw = 0.0) { return {{x, y, z}, {2.0, 2.0, 4.0}, yaw}; }

ObjectLabel car(double left, double z, double score) {
  ObjectLabel l;
  l.class_name = "Car";
  l.bbox = {left, 100, left + 80, 160};
  l.dims = {1.5, 1.6, 3.9};
  l.location = {left / 100.0, 1.6, z};
  l.score = score;
  return l;
}

}  // namespace

TEST_CASE("oracle corners follow the production ordering") {
  synth::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Box3D b = synth::random_box(rng, 10.0);
    const auto a = oracle::corners(b);
    const auto c = box_corners(b);
    for (int k = 0; k < 8; ++k) {
      CHECK(a[k].x == doctest::Approx(c[k].x));
      CHECK(a[k].y == doctest::Approx(c[k].y));
      CHECK(a[k].z == doctest::Approx(c[k].z));
    }
  }
}

TEST_CASE("half-space containment") {
  const Box3D b = slab(0, 0, 10, 0.3);
  CHECK(oracle::halfspace_contains(b, {0, -1, 10}));
  CHECK_FALSE(oracle::halfspace_contains(b, {0, 0.1, 10}));
  CHECK_FALSE(oracle::halfspace_contains(b, {0, -2.1, 10}));
  CHECK_FALSE(oracle::halfspace_contains(b, {3, -1, 10}));
  CHECK(oracle::halfspace_contains(b, {1.5 * std::cos(0.3), -1, 10 - 1.5 * std::sin(0.3)}));
}

TEST_CASE("raster overlap of grid-aligned boxes is exact") {
  CHECK(oracle::raster_iou_2d({0, 0, 10, 10}, {5, 0, 15, 10}, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(oracle::raster_iou_2d({0, 0, 10, 10}, {20, 20, 30, 30}, 0.5) == 0.0);
  CHECK(oracle::raster_iou_2d({0, 0, 10, 10}, {0, 0, 10, 10}, 0.5) == 1.0);
}

TEST_CASE("Monte-Carlo overlaps of axis-aligned boxes") {
  CHECK(oracle::mc_iou_bev(slab(0, 0, 10), slab(2, 0, 10), 200000, 1) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  CHECK(oracle::mc_iou_3d(slab(0, 0, 10), slab(2, 0, 10), 200000, 2) == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  CHECK(oracle::mc_iou_3d(slab(0, 0, 10), slab(2, 1, 10), 200000, 3) == doctest::Approx(1.0 / 7.0).epsilon(0.03));
  CHECK(oracle::mc_iou_3d(slab(0, 0, 10), slab(10, 0, 10), 10000, 4) == 0.0);
  const auto fp = bev_footprint(slab(0, 0, 10, 0.7));
  CHECK(oracle::mc_convex_intersection_area(fp, fp, 200000, 5) == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("replay oracle counts") {
  const std::vector<ObjectLabel> gts = {car(0, 20, 0), car(300, 30, 0)};
  const std::vector<GtStatus> st = {GtStatus::Evaluate, GtStatus::Ignore};
  auto near = car(0, 20 + std::log(2.0), 0.9);
  const std::vector<ObjectLabel> dets = {near, car(0, 20, 0.5), car(300, 30, 0.4), car(700, 30, 0.3)};
  const auto r = oracle::replay_frame(gts, st, dets, OverlapKind::Image2D, 0.7, 0.0);
  CHECK(r.tp == 1);
  CHECK(r.fp == 2);
  CHECK(r.ignored == 1);
  CHECK(r.depth_similarity_sum == doctest::Approx(0.5));
  const auto cut = oracle::replay_frame(gts, st, dets, OverlapKind::Image2D, 0.7, 0.45);
  CHECK(cut.tp == 1);
  CHECK(cut.fp == 1);
  CHECK(cut.ignored == 0);
}

TEST_CASE("brute-force metric on a hand-computed frame") {
  std::vector<Frame> frames = {{"a", {car(0, 20, 0), car(200, 20, 0)}, {}}};
  frames[0].dets = {car(0, 20, 0.9), car(600, 20, 0.7), car(200, 20 + std::log(2.0), 0.5)};
  EvalConfig cfg = EvalConfig::for_class("Car");
  cfg.recall_points = 2;
  CHECK(oracle::brute_force_metric(frames, cfg, OverlapKind::Image2D, Similarity::Precision) ==
        doctest::Approx(100.0 * (1.0 + 2.0 / 3.0) / 2.0));
  CHECK(oracle::brute_force_metric(frames, cfg, OverlapKind::Image2D, Similarity::Depth) ==
        doctest::Approx(75.0));
  frames[0].gts.clear();
  CHECK_THROWS_AS(oracle::brute_force_metric(frames, cfg, OverlapKind::Image2D, Similarity::Precision),
                  UndefinedRecallError);
}

TEST_CASE("central difference of a quadratic") {
  const auto f = [](std::span<const double> x) { return x[0] * x[0] + 3.0 * x[1]; };
  CHECK(oracle::central_difference(f, {2.0, 1.0}, 0, 1e-4) == doctest::Approx(4.0));
  CHECK(oracle::central_difference(f, {2.0, 1.0}, 1, 1e-4) == doctest::Approx(3.0));
}
