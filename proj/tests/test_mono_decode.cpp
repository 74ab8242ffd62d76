#include <doctest.h>

#include <cmath>

#include "adseval/angles.hpp"
#include "adseval/errors.hpp"
#include "adseval/mono_decode.hpp"
#include "adseval/testkit/synth.hpp"

using namespace adseval;

namespace {

KeypointSet uniform_lines(double height_px) {
  KeypointSet kp;
  for (int k = 0; k < 4; ++k) {
    kp.points[k] = {100.0 + 10 * k, 200.0};
    kp.points[k + 4] = {100.0 + 10 * k, 200.0 - height_px};
  }
  kp.points[8] = {115.0, 200.0};
  kp.points[9] = {115.0, 200.0 - height_px};
  return kp;
}

BinOutputs one_hot(int bin, int n, Vec2 sincos) {
  BinOutputs o;
  o.logits.assign(n, 0.0);
  o.sincos.assign(n, Vec2{0.0, 1.0});
  o.logits[bin] = 1.0;
  o.sincos[bin] = sincos;
  return o;
}

}  // namespace

TEST_CASE("depth_from_line") {
  CHECK(depth_from_line(720, 1.5, 54) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(depth_from_line(700, 1.5, 700 * 1.5 / 46.7) == doctest::Approx(46.7).epsilon(1e-14));
  CHECK_THROWS_AS(depth_from_line(700, 1.5, 0.0), DegenerateLineError);
  CHECK_THROWS_AS(depth_from_line(700, 1.5, -3.0), DomainError);
}

TEST_CASE("group_line_depths with equal line heights") {
  const auto z = group_line_depths(uniform_lines(35.0), 700, 1.5);
  for (double d : z) CHECK(d == doctest::Approx(700 * 1.5 / 35.0));
}

TEST_CASE("group_line_depths averages diagonal pairs") {
  KeypointSet kp = uniform_lines(50.0);
  // Corner lines 0 and 2 at depths 10 and 12 for f * h = 600.
  kp.points[4].y = kp.points[0].y - 60.0;
  kp.points[6].y = kp.points[2].y - 50.0;
  const auto z = group_line_depths(kp, 600, 1.0);
  CHECK(z[0] == doctest::Approx(11.0));
  CHECK(z[1] == doctest::Approx(12.0));
  CHECK(z[2] == doctest::Approx(12.0));
}

TEST_CASE("group_line_depths identifies a degenerate line") {
  KeypointSet kp = uniform_lines(50.0);
  kp.points[7].y = kp.points[3].y - 0.5;
  try {
    group_line_depths(kp, 700, 1.5);
    FAIL("expected a degenerate-line error");
  } catch (const DegenerateLineError& e) {
    CHECK(e.line_index() == 3);
  }
  kp = uniform_lines(50.0);
  kp.points[9].y = kp.points[8].y + 1.0;
  CHECK_THROWS_AS(group_line_depths(kp, 700, 1.5), DegenerateLineError);
}

TEST_CASE("group_line_depths recovers the depth of a projected box") {
  synth::Rng rng(1);
  const auto calib = synth::kitti_calib();
  for (int i = 0; i < 500; ++i) {
    const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, {1.5, 1.6, 3.9});
    KeypointSet kp;
    const auto c = box_corners(box);
    for (int k = 0; k < 8; ++k) kp.points[k] = project_to_image(c[k], calib);
    kp.points[8] = project_to_image(box.location, calib);
    kp.points[9] = project_to_image({box.location.x, box.location.y - box.dims.h, box.location.z}, calib);
    for (double z : group_line_depths(kp, calib.focal, box.dims.h)) {
      CHECK(z == doctest::Approx(box.location.z).epsilon(1e-6 / 80));
    }
  }
}

TEST_CASE("fuse_depths examples") {
  const std::vector<DepthEstimate> equal = {{10, 1}, {20, 1}, {30, 1}, {40, 1}};
  CHECK(fuse_depths(equal) == doctest::Approx(25.0));
  const std::vector<DepthEstimate> weighted = {{10, 1}, {30, 3}};
  CHECK(fuse_depths(weighted) == doctest::Approx(15.0));
  const std::vector<DepthEstimate> single = {{17.25, 0.3}};
  CHECK(fuse_depths(single) == 17.25);
  CHECK_THROWS_AS(fuse_depths(std::vector<DepthEstimate>{}), std::invalid_argument);
  const std::vector<DepthEstimate> zero = {{10, 1}, {30, 0}};
  CHECK_THROWS_AS(fuse_depths(zero), DomainError);
}

TEST_CASE("fuse_depths is a convex combination invariant to sigma scale") {
  synth::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    std::vector<DepthEstimate> e(1 + i % 6);
    double lo = 1e9, hi = -1e9;
    for (auto& d : e) {
      d = {synth::uniform(rng, 1, 80), synth::uniform(rng, 0.05, 5)};
      lo = std::min(lo, d.z), hi = std::max(hi, d.z);
    }
    const double z = fuse_depths(e);
    CHECK(z >= lo - 1e-12);
    CHECK(z <= hi + 1e-12);
    const double k = synth::uniform(rng, 0.01, 100);
    for (auto& d : e) d.sigma *= k;
    CHECK(std::fabs(fuse_depths(e) - z) <= 1e-12 * std::max(1.0, z));
  }
}

TEST_CASE("decode_center") {
  DecoderConfig c;
  Vec2 p = decode_center({100, 50}, {0, 0}, c);
  CHECK(p.x == 400.0);
  CHECK(p.y == 200.0);
  p = decode_center({100, 50}, {0.5, -0.5}, c);
  CHECK(p.x == 400.5);
  CHECK(p.y == 199.5);
  c.downsample = 1;
  p = decode_center({321, 77}, {0, 0}, c);
  CHECK(p.x == 321.0);
  CHECK(p.y == 77.0);
}

TEST_CASE("backproject") {
  const auto calib = CalibrationSet::pinhole(700, 600, 180);
  Vec3 p = backproject({600, 180}, 23.0, calib);
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 23.0);
  p = backproject({1300, 180}, 10.0, calib);
  CHECK(p.x == doctest::Approx(10.0));
  CHECK(p.z == 10.0);
  CHECK_THROWS_AS(backproject({600, 180}, 0.0, calib), DomainError);
  synth::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q{synth::uniform(rng, -40, 40), synth::uniform(rng, -3, 3), synth::uniform(rng, 0.5, 90)};
    const Vec3 back = backproject(project_to_image(q, calib), q.z, calib);
    CHECK(std::fabs(back.x - q.x) < 1e-9);
    CHECK(std::fabs(back.y - q.y) < 1e-9);
  }
}

TEST_CASE("decode_dimensions") {
  const auto c = DecoderConfig::kitti_defaults();
  const Dims car = c.class_mean_dims.at("Car");
  const Dims d = decode_dimensions("Car", {0, 0, 0}, c);
  CHECK(d.h == car.h);
  CHECK(d.w == car.w);
  CHECK(d.l == car.l);
  DecoderConfig custom;
  custom.class_mean_dims["Thing"] = {1.5, 1.0, 1.0};
  CHECK(decode_dimensions("Thing", {std::log(2.0), 0, 0}, custom).h == doctest::Approx(3.0));
  CHECK_THROWS_AS(decode_dimensions("Tram", {0, 0, 0}, c), MissingPriorError);
  synth::Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    std::array<double, 3> delta = {synth::uniform(rng, -5, 5), synth::uniform(rng, -5, 5), synth::uniform(rng, -5, 5)};
    const Dims a = decode_dimensions("Cyclist", delta, c);
    CHECK(a.h > 0);
    CHECK(a.w > 0);
    CHECK(a.l > 0);
    delta[i % 3] += 0.01;
    const Dims b = decode_dimensions("Cyclist", delta, c);
    CHECK(b.h >= a.h);
    CHECK(b.w >= a.w);
    CHECK(b.l >= a.l);
  }
}

TEST_CASE("DecoderConfig validation") {
  DecoderConfig c = DecoderConfig::kitti_defaults();
  CHECK_NOTHROW(c.validate());
  c.downsample = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = DecoderConfig::kitti_defaults();
  c.class_mean_dims["Car"].w = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("multibin_decode examples") {
  CHECK(multibin_decode(one_hot(0, 4, {0, 1})) == doctest::Approx(-3 * kPi / 4));
  CHECK(multibin_decode(one_hot(2, 4, {1, 0})) == doctest::Approx(3 * kPi / 4));
  CHECK_THROWS_AS(multibin_decode(one_hot(1, 4, {0, 0})), DomainError);
  BinOutputs tie = one_hot(1, 4, {0, 1});
  tie.logits = {2.0, 2.0, 2.0, 2.0};
  tie.sincos[0] = {0, 1};
  CHECK(multibin_decode(tie) == doctest::Approx(multibin_bin_center(0, 4)));
}

TEST_CASE("multibin encode then decode") {
  synth::Rng rng(5);
  for (int n : {2, 4, 8}) {
    for (int i = 0; i < 1000; ++i) {
      const double alpha = synth::uniform(rng, -kPi, kPi);
      const auto t = multibin_encode(alpha, n);
      CHECK(t.bin >= 0);
      CHECK(t.bin < n);
      CHECK(std::fabs(t.residual) <= kPi / n + 1e-12);
      BinOutputs o = one_hot(t.bin, n, {std::sin(t.residual), std::cos(t.residual)});
      CHECK(std::fabs(angle_diff(multibin_decode(o), alpha)) < 1e-9);
      const double shift = synth::uniform(rng, -50, 50);
      for (auto& l : o.logits) l += shift;
      CHECK(std::fabs(angle_diff(multibin_decode(o), alpha)) < 1e-9);
    }
  }
}

TEST_CASE("assemble_box recovers encoded boxes") {
  synth::Rng rng(6);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  for (int i = 0; i < 1000; ++i) {
    const char* cls = i % 3 == 0 ? "Pedestrian" : "Car";
    const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, config.class_mean_dims.at(cls));
    const std::array<double, 4> sigmas = {synth::uniform(rng, 0.1, 3), synth::uniform(rng, 0.1, 3),
                                          synth::uniform(rng, 0.1, 3), synth::uniform(rng, 0.1, 3)};
    const Box3D got = assemble_box(synth::encode_observation(box, cls, calib, config, sigmas), calib, config);
    CHECK(std::fabs(got.location.x - box.location.x) < 1e-6);
    CHECK(std::fabs(got.location.y - box.location.y) < 1e-6);
    CHECK(std::fabs(got.location.z - box.location.z) < 1e-6);
    CHECK(std::fabs(got.dims.h - box.dims.h) < 1e-6);
    CHECK(std::fabs(got.dims.w - box.dims.w) < 1e-6);
    CHECK(std::fabs(got.dims.l - box.dims.l) < 1e-6);
    CHECK(std::fabs(angle_diff(got.yaw, box.yaw)) < 1e-6);
  }
}

TEST_CASE("equal uncertainties reduce to the plain mean") {
  synth::Rng rng(7);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, config.class_mean_dims.at("Car"));
  Observation obs = synth::encode_observation(box, "Car", calib, config, {0.7, 0.7, 0.7, 0.7});
  obs.depths[0].z += 2.0;
  obs.depths[3].z -= 1.0;
  double mean = 0.0;
  for (const auto& d : obs.depths) mean += d.z / 4.0;
  const Box3D got = assemble_box(obs, calib, config);
  CHECK(got.location.z == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("assemble_box rejects a non-positive fused depth") {
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  Observation obs;
  obs.class_name = "Car";
  obs.depths = {{-3.0, 1.0}, {1.0, 1.0}};
  obs.orientation = one_hot(0, 4, {0, 1});
  CHECK_THROWS_AS(assemble_box(obs, calib, config), DomainError);
  obs.class_name = "Tram";
  obs.depths = {{10.0, 1.0}};
  CHECK_THROWS_AS(assemble_box(obs, calib, config), MissingPriorError);
}

TEST_CASE("decode_object reports the center and observation angle") {
  synth::Rng rng(8);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, config.class_mean_dims.at("Car"));
  const auto obs = synth::encode_observation(box, "Car", calib, config);
  const auto d = decode_object(obs, calib, config);
  const Vec2 c = project_to_image({box.location.x, box.location.y - box.dims.h / 2, box.location.z}, calib);
  CHECK(d.center2d.x == doctest::Approx(c.x));
  CHECK(d.center2d.y == doctest::Approx(c.y));
  CHECK(std::fabs(angle_diff(d.alpha, global_to_local_yaw(box.yaw, box.location.x, box.location.z))) < 1e-9);
}
