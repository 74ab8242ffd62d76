// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "adseval/angles.hpp"
#include "adseval/cli.hpp"
#include "adseval/errors.hpp"
#include "adseval/testkit/oracles.hpp"
#include "adseval/testkit/synth.hpp"

namespace adseval::cli {
namespace {

void report(std::ostream& out, bool ok, const std::string& name, const std::string& detail) {
  out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

bool check_iou(const SelftestOptions& o, std::ostream& out) {
  synth::Rng rng(o.seed);
  const int pairs = o.quick ? 20 : 100;
  const std::size_t samples = o.quick ? 100000 : 400000;
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Box3D a = synth::random_box(rng, 1.5), b = synth::random_box(rng, 1.5);
    worst = std::max(worst, std::fabs(iou_bev(a, b) - oracle::mc_iou_bev(a, b, samples, o.seed + i)));
    worst = std::max(worst, std::fabs(iou_3d(a, b) - oracle::mc_iou_3d(a, b, samples, o.seed + i)));
  }
  const bool ok = worst < 1e-2;
  report(out, ok, "rotated IoU vs Monte-Carlo", "max |diff| " + num(worst) + " over " + std::to_string(pairs) + " pairs");
  return ok;
}

bool check_ap(const SelftestOptions& o, std::ostream& out) {
  synth::Rng rng(o.seed + 1);
  const int scenes = o.quick ? 20 : 100;
  double worst = 0.0;
  int compared = 0;
  for (int i = 0; i < scenes; ++i) {
    const auto frames = synth::random_scene(rng);
    const EvalConfig cfg = EvalConfig::for_class("Car");
    try {
      for (auto kind : {OverlapKind::Image2D, OverlapKind::Bev, OverlapKind::Box3D}) {
        worst = std::max(worst, std::fabs(average_precision(frames, cfg, kind).value -
                                          oracle::brute_force_metric(frames, cfg, kind, Similarity::Precision)));
      }
      worst = std::max(worst, std::fabs(ads(frames, cfg).value -
                                        oracle::brute_force_metric(frames, cfg, OverlapKind::Image2D, Similarity::Depth)));
      ++compared;
    } catch (const UndefinedRecallError&) {
    }
  }
  const bool ok = worst <= 1e-9;
  report(out, ok, "AP/ADS vs cutoff enumeration", "max |diff| " + num(worst) + " over " + std::to_string(compared) + " scenes");
  return ok;
}

bool check_decode(const SelftestOptions& o, std::ostream& out) {
  synth::Rng rng(o.seed + 2);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  const int n = o.quick ? 100 : 1000;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, config.class_mean_dims.at("Car"));
    const Box3D got = assemble_box(synth::encode_observation(box, "Car", calib, config), calib, config);
    const double diffs[] = {got.location.x - box.location.x, got.location.y - box.location.y,
                            got.location.z - box.location.z, got.dims.h - box.dims.h, got.dims.w - box.dims.w,
                            got.dims.l - box.dims.l, angle_diff(got.yaw, box.yaw)};
    for (double d : diffs) worst = std::max(worst, std::fabs(d));
  }
  const bool ok = worst <= 1e-6;
  report(out, ok, "decode round trip", "max |diff| " + num(worst) + " over " + std::to_string(n) + " boxes");
  return ok;
}

}  // namespace

bool run_selftest(const SelftestOptions& options, std::ostream& out) {
  bool ok = true;
  ok &= check_iou(options, out);
  ok &= check_ap(options, out);
  ok &= check_decode(options, out);
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace adseval::cli
