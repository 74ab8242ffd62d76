// SPDX-License-Identifier: Apache-2.0
#include "adseval/testkit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "adseval/errors.hpp"

namespace adseval::oracle {

std::array<Vec3, 8> corners(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  // R_y = [[c, 0, s], [0, 1, 0], [-s, 0, c]]
  const double r[3][3] = {{c, 0, s}, {0, 1, 0}, {-s, 0, c}};
  const double l = box.dims.l, w = box.dims.w, h = box.dims.h;
  const double xs[4] = {l / 2, l / 2, -l / 2, -l / 2};
  const double zs[4] = {-w / 2, w / 2, w / 2, -w / 2};
  std::array<Vec3, 8> out;
  for (int face = 0; face < 2; ++face) {
    const double y = face == 0 ? 0.0 : -h;
    for (int i = 0; i < 4; ++i) {
      const double local[3] = {xs[i], y, zs[i]};
      double g[3];
      for (int row = 0; row < 3; ++row) g[row] = r[row][0] * local[0] + r[row][1] * local[1] + r[row][2] * local[2];
      out[face * 4 + i] = {box.location.x + g[0], box.location.y + g[1], box.location.z + g[2]};
    }
  }
  return out;
}

namespace {

Vec3 cross3(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

bool inside_polygon(const BevPolygon& poly, Vec2 p) {
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a = poly.vertices[i];
    const Vec2 b = poly.vertices[(i + 1) % 4];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Two independent uniforms in [0, 1) from one 64-bit draw.
std::pair<double, double> unit_pair(std::mt19937_64& rng) {
  const std::uint64_t r = rng();
  return {static_cast<double>(r >> 32) * 0x1.0p-32, static_cast<double>(r & 0xffffffffu) * 0x1.0p-32};
}

// Point membership by rotating into the box frame.
struct LocalFrame {
  explicit LocalFrame(const Box3D& b)
      : c(std::cos(b.yaw)), s(std::sin(b.yaw)), x(b.location.x), y(b.location.y), z(b.location.z),
        hl(b.dims.l / 2), hw(b.dims.w / 2), h(b.dims.h) {}
  bool contains_xz(double px, double pz) const {
    const double dx = px - x, dz = pz - z;
    return (std::fabs(c * dx - s * dz) <= hl) & (std::fabs(s * dx + c * dz) <= hw);
  }
  bool contains_y(double py) const { return (py <= y) & (py >= y - h); }
  double c, s, x, y, z, hl, hw, h;
};

}  // namespace

bool halfspace_contains(const Box3D& box, Vec3 p) {
  const auto c = corners(box);
  const Vec3 center = (c[0] + c[6]) * 0.5;
  // Each face as three of its corners.
  const int faces[6][3] = {{0, 1, 2}, {4, 5, 6}, {0, 1, 5}, {1, 2, 6}, {2, 3, 7}, {3, 0, 4}};
  for (const auto& f : faces) {
    Vec3 n = cross3(c[f[1]] - c[f[0]], c[f[2]] - c[f[0]]);
    if (dot(n, center - c[f[0]]) > 0.0) n = n * -1.0;  // make it point outward
    if (dot(n, p - c[f[0]]) > 0.0) return false;
  }
  return true;
}

double raster_iou_2d(const Box2D& a, const Box2D& b, double pitch) {
  const double x0 = std::min(a.left, b.left), x1 = std::max(a.right, b.right);
  const double y0 = std::min(a.top, b.top), y1 = std::max(a.bottom, b.bottom);
  std::size_t both = 0, either = 0;
  for (double y = y0 + pitch / 2; y < y1; y += pitch) {
    for (double x = x0 + pitch / 2; x < x1; x += pitch) {
      const bool in_a = x >= a.left && x <= a.right && y >= a.top && y <= a.bottom;
      const bool in_b = x >= b.left && x <= b.right && y >= b.top && y <= b.bottom;
      both += in_a && in_b;
      either += in_a || in_b;
    }
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

double mc_convex_intersection_area(const BevPolygon& p, const BevPolygon& q, std::size_t samples, std::uint64_t seed) {
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& v : p.vertices) {
    x0 = std::min(x0, v.x), x1 = std::max(x1, v.x), y0 = std::min(y0, v.y), y1 = std::max(y1, v.y);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec2 pt{ux(rng), uy(rng)};
    if (inside_polygon(p, pt) && inside_polygon(q, pt)) ++hits;
  }
  return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / static_cast<double>(samples);
}

double mc_iou_bev(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed) {
  const LocalFrame fa(a), fb(b);
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, z0 = x0, z1 = -x0;
  for (const auto* box : {&a, &b}) {
    for (const auto& c : corners(*box)) {
      x0 = std::min(x0, c.x), x1 = std::max(x1, c.x), z0 = std::min(z0, c.z), z1 = std::max(z1, c.z);
    }
  }
  std::mt19937_64 rng(seed);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [u, v] = unit_pair(rng);
    const double x = x0 + (x1 - x0) * u, z = z0 + (z1 - z0) * v;
    const bool ia = fa.contains_xz(x, z), ib = fb.contains_xz(x, z);
    both += ia & ib;
    either += ia | ib;
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

double mc_iou_3d(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed) {
  const LocalFrame fa(a), fb(b);
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec3 hi = lo * -1.0;
  for (const auto* box : {&a, &b}) {
    for (const auto& c : corners(*box)) {
      lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
      hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
    }
  }
  std::mt19937_64 rng(seed);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [u, v] = unit_pair(rng);
    const double x = lo.x + (hi.x - lo.x) * u;
    const double y = lo.y + (hi.y - lo.y) * unit(rng);
    const double z = lo.z + (hi.z - lo.z) * v;
    const bool ia = fa.contains_y(y) & fa.contains_xz(x, z);
    const bool ib = fb.contains_y(y) & fb.contains_xz(x, z);
    both += ia & ib;
    either += ia | ib;
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

std::vector<GtStatus> reference_status(std::span<const ObjectLabel> gts, const EvalConfig& config) {
  static const double kMinHeight[3] = {40, 25, 25};
  static const int kMaxOcc[3] = {0, 1, 2};
  static const double kMaxTrunc[3] = {0.15, 0.30, 0.50};
  std::vector<GtStatus> out;
  for (const auto& g : gts) {
    const bool neighbor =
        std::find(config.neighbor_classes.begin(), config.neighbor_classes.end(), g.class_name) !=
        config.neighbor_classes.end();
    if (g.class_name == "DontCare" || neighbor) {
      out.push_back(GtStatus::Ignore);
    } else if (g.class_name != config.class_name) {
      out.push_back(GtStatus::Exclude);
    } else if (config.visibility) {
      const double height = g.bbox.bottom - g.bbox.top;
      Visibility v = Visibility::Occluded;
      if (g.occlusion == 3 || height < 25) {
        v = Visibility::Ignore;
      } else if (g.occlusion == 0 && g.truncation == 0) {
        v = Visibility::FullyVisible;
      }
      out.push_back(v == *config.visibility ? GtStatus::Evaluate : GtStatus::Ignore);
    } else {
      const int d = static_cast<int>(config.difficulty);
      const bool ok = g.bbox.bottom - g.bbox.top >= kMinHeight[d] && g.occlusion <= kMaxOcc[d] &&
                      g.truncation <= kMaxTrunc[d];
      out.push_back(ok ? GtStatus::Evaluate : GtStatus::Ignore);
    }
  }
  return out;
}

ReplayCounts replay_frame(std::span<const ObjectLabel> gts, std::span<const GtStatus> status,
                          std::span<const ObjectLabel> dets, OverlapKind kind, double threshold, double cutoff) {
  ReplayCounts counts;
  std::vector<bool> used_det(dets.size(), false);
  std::vector<bool> claimed(gts.size(), false);
  for (;;) {
    // Pick the next detection by linear scan rather than sorting.
    long next = -1;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (used_det[i] || *dets[i].score < cutoff) continue;
      if (next < 0 || *dets[i].score > *dets[next].score) next = static_cast<long>(i);
    }
    if (next < 0) break;
    used_det[next] = true;
    const ObjectLabel& d = dets[next];

    long best = -1;
    double best_ov = -1.0;
    bool absorbed = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double ov = overlap(kind, d, gts[g]);
      if (ov < threshold) continue;
      if (status[g] == GtStatus::Evaluate && !claimed[g] && ov > best_ov) {
        best = static_cast<long>(g);
        best_ov = ov;
      }
      if (status[g] == GtStatus::Ignore) absorbed = true;
    }
    if (best >= 0) {
      claimed[best] = true;
      ++counts.tp;
      counts.depth_similarity_sum += std::exp(-std::abs(d.location.z - gts[best].location.z));
      double dtheta = gts[best].alpha - d.alpha;
      counts.orientation_similarity_sum += (1.0 + std::cos(dtheta)) / 2.0;
    } else if (absorbed) {
      ++counts.ignored;
    } else {
      ++counts.fp;
    }
  }
  return counts;
}

double brute_force_metric(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind,
                          Similarity similarity) {
  const double threshold = kind == OverlapKind::Image2D ? config.thresholds.iou_2d
                           : kind == OverlapKind::Bev   ? config.thresholds.iou_bev
                                                        : config.thresholds.iou_3d;
  struct PerFrame {
    std::vector<ObjectLabel> dets;
    std::vector<GtStatus> status;
  };
  std::vector<PerFrame> per;
  std::size_t num_gt = 0;
  std::set<double> cutoffs;
  for (const auto& f : frames) {
    PerFrame pf;
    pf.status = reference_status(f.gts, config);
    num_gt += static_cast<std::size_t>(std::count(pf.status.begin(), pf.status.end(), GtStatus::Evaluate));
    for (const auto& d : f.dets) {
      if (d.class_name != config.class_name) continue;
      pf.dets.push_back(d);
      cutoffs.insert(*d.score);
    }
    per.push_back(std::move(pf));
  }
  if (num_gt == 0) throw UndefinedRecallError();

  struct Point {
    std::size_t tp;
    double value;
  };
  std::vector<Point> points;
  for (double c : cutoffs) {
    std::size_t tp = 0, fp = 0;
    double sim = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto r = replay_frame(frames[i].gts, per[i].status, per[i].dets, kind, threshold, c);
      tp += r.tp;
      fp += r.fp;
      sim += similarity == Similarity::Precision     ? static_cast<double>(r.tp)
             : similarity == Similarity::Orientation ? r.orientation_similarity_sum
                                                     : r.depth_similarity_sum;
    }
    if (tp + fp == 0) continue;
    points.push_back({tp, sim / static_cast<double>(tp + fp)});
  }

  const int n = config.recall_points;
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    double best = 0.0;
    for (const auto& p : points) {
      // recall tp / num_gt >= k / n, in exact integer arithmetic
      if (p.tp * static_cast<std::size_t>(n) >= static_cast<std::size_t>(k) * num_gt) best = std::max(best, p.value);
    }
    total += best;
  }
  return 100.0 * total / n;
}

MetricReport reference_report(std::span<const Frame> frames, const EvaluationPlan& plan) {
  MetricReport report;
  report.recall_points = plan.recall_points;
  for (const auto& config : plan.configs()) {
    const std::string subset(config.visibility ? to_string(*config.visibility) : to_string(config.difficulty));
    SubsetReport sub;
    for (const auto& f : frames) {
      const auto st = reference_status(f.gts, config);
      sub.num_gt += static_cast<std::size_t>(std::count(st.begin(), st.end(), GtStatus::Evaluate));
    }
    if (sub.num_gt > 0) {
      sub.metrics[Metric::AP_2D].value = brute_force_metric(frames, config, OverlapKind::Image2D, Similarity::Precision);
      sub.metrics[Metric::AP_BEV].value = brute_force_metric(frames, config, OverlapKind::Bev, Similarity::Precision);
      sub.metrics[Metric::AP_3D].value = brute_force_metric(frames, config, OverlapKind::Box3D, Similarity::Precision);
      sub.metrics[Metric::AOS].value = brute_force_metric(frames, config, OverlapKind::Image2D, Similarity::Orientation);
      sub.metrics[Metric::ADS].value = brute_force_metric(frames, config, OverlapKind::Image2D, Similarity::Depth);
    }
    report.classes[config.class_name][subset] = std::move(sub);
  }
  return report;
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                          std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

}  // namespace adseval::oracle
