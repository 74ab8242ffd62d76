// SPDX-License-Identifier: Apache-2.0
#include "adseval/testkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "adseval/angles.hpp"

namespace adseval::synth {

CalibrationSet kitti_calib() { return CalibrationSet::pinhole(721.5377, 609.5593, 172.854); }

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Box3D random_box(Rng& rng, double extent) {
  Box3D b;
  b.location = {uniform(rng, -extent, extent), uniform(rng, -1.0, 1.0), uniform(rng, -extent, extent)};
  b.dims = {uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 5.0)};
  b.yaw = uniform(rng, -kPi, kPi);
  return b;
}

namespace {

bool in_image(const Box3D& box, const CalibrationSet& calib) {
  for (const auto& c : box_corners(box)) {
    if (c.z < 1.0) return false;
    const Vec2 p = project_to_image(c, calib);
    if (p.x < 0.0 || p.x > 1242.0 || p.y < 0.0 || p.y > 375.0) return false;
  }
  return true;
}

}  // namespace

Box3D random_visible_box(Rng& rng, const CalibrationSet& calib, double z_min, double z_max, const Dims& mean) {
  for (;;) {
    Box3D b;
    b.dims = {mean.h * uniform(rng, 0.85, 1.15), mean.w * uniform(rng, 0.85, 1.15), mean.l * uniform(rng, 0.85, 1.15)};
    const double z = uniform(rng, z_min, z_max);
    const double half_fov = 0.45 * z;
    b.location = {uniform(rng, -half_fov, half_fov), uniform(rng, 1.4, 1.9), z};
    b.yaw = uniform(rng, -kPi, kPi);
    if (in_image(b, calib)) return b;
  }
}

ObjectLabel label_from_box(const Box3D& box, const CalibrationSet& calib, const std::string& class_name,
                           std::optional<double> score) {
  ObjectLabel l;
  l.class_name = class_name;
  double x0 = std::numeric_limits<double>::max(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& c : box_corners(box)) {
    const Vec2 p = project_to_image(c, calib);
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  l.bbox = {x0, y0, x1, y1};
  l.dims = box.dims;
  l.location = box.location;
  l.rotation_y = wrap_angle(box.yaw);
  l.alpha = global_to_local_yaw(l.rotation_y, box.location.x, box.location.z);
  l.score = score;
  return l;
}

ObjectLabel shift_along_ray(const ObjectLabel& label, double z) {
  ObjectLabel out = label;
  const double ray = z / label.location.z;
  out.location = {label.location.x * ray, label.location.y * ray, z};
  return out;
}

std::vector<Frame> random_scene(Rng& rng, const SceneOptions& options) {
  static const char* kClasses[] = {"Car", "Car", "Car", "Pedestrian", "Van", "DontCare"};
  const int frames = std::uniform_int_distribution<int>(1, options.max_frames)(rng);
  const int total = std::uniform_int_distribution<int>(2, options.max_objects)(rng);
  std::vector<Frame> out(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) out[i].id = std::to_string(100 + i);

  auto random_label = [&](bool detection) {
    ObjectLabel l;
    l.class_name = detection ? (uniform(rng, 0, 1) < 0.85 ? "Car" : "Pedestrian")
                             : kClasses[std::uniform_int_distribution<int>(0, 5)(rng)];
    const double x = uniform(rng, 0, 200), y = uniform(rng, 0, 100);
    l.bbox = {x, y, x + uniform(rng, 20, 80), y + uniform(rng, 15, 70)};
    l.truncation = uniform(rng, 0, 1) < 0.7 ? 0.0 : uniform(rng, 0.0, 0.6);
    l.occlusion = std::uniform_int_distribution<int>(0, 3)(rng);
    l.dims = {uniform(rng, 1.2, 1.8), uniform(rng, 1.4, 1.9), uniform(rng, 3.0, 4.6)};
    l.location = {uniform(rng, -3, 3), uniform(rng, 1.4, 1.9), uniform(rng, 8, 16)};
    l.rotation_y = uniform(rng, -kPi, kPi);
    l.alpha = uniform(rng, -kPi, kPi);
    if (detection) {
      l.score = options.quantized_scores ? std::round(uniform(rng, 0.05, 1.0) * 5.0) / 5.0 + 0.1 : uniform(rng, 0.01, 1.0);
    }
    return l;
  };

  for (int n = 0; n < total; ++n) {
    Frame& f = out[std::uniform_int_distribution<int>(0, frames - 1)(rng)];
    const bool detection = uniform(rng, 0, 1) < 0.5;
    if (detection && !f.gts.empty() && uniform(rng, 0, 1) < 0.7) {
      // Perturb an existing ground truth so overlaps straddle the thresholds.
      const ObjectLabel& g = f.gts[std::uniform_int_distribution<std::size_t>(0, f.gts.size() - 1)(rng)];
      ObjectLabel d = g;
      d.class_name = g.class_name == "DontCare" || g.class_name == "Van" ? "Car" : g.class_name;
      const double dx = uniform(rng, -8, 8), dy = uniform(rng, -6, 6);
      d.bbox = {g.bbox.left + dx, g.bbox.top + dy, g.bbox.right + dx + uniform(rng, -5, 5),
                g.bbox.bottom + dy + uniform(rng, -5, 5)};
      d.location = {g.location.x + uniform(rng, -0.4, 0.4), g.location.y + uniform(rng, -0.1, 0.1),
                    g.location.z + uniform(rng, -1.5, 1.5)};
      d.rotation_y = wrap_angle(g.rotation_y + uniform(rng, -0.3, 0.3));
      d.alpha = wrap_angle(g.alpha + uniform(rng, -1.0, 1.0));
      d.score = options.quantized_scores ? std::round(uniform(rng, 0.05, 1.0) * 5.0) / 5.0 + 0.1 : uniform(rng, 0.01, 1.0);
      d.truncation = 0.0;
      d.occlusion = 0;
      f.dets.push_back(d);
    } else if (detection) {
      f.dets.push_back(random_label(true));
    } else {
      f.gts.push_back(random_label(false));
    }
  }
  return out;
}

std::vector<Frame> attack_fixture(const AttackFixtureOptions& options) {
  Rng rng(options.seed);
  const CalibrationSet calib = kitti_calib();
  const Dims car = DecoderConfig::kitti_defaults().class_mean_dims.at("Car");
  std::normal_distribution<double> noise(0.0, options.depth_sigma);
  std::vector<Frame> frames;
  for (int i = 0; i < options.frames; ++i) {
    Frame f;
    char id[16];
    std::snprintf(id, sizeof(id), "%06d", i);
    f.id = id;
    const int n = std::uniform_int_distribution<int>(options.min_objects, options.max_objects)(rng);
    for (int k = 0; k < n; ++k) {
      const Box3D box = random_visible_box(rng, calib, options.z_min, options.z_max, car);
      ObjectLabel gt = label_from_box(box, calib, "Car");
      f.gts.push_back(gt);
      double z = gt.location.z + noise(rng);
      z = std::max(z, 1.0);
      ObjectLabel det = shift_along_ray(gt, z);
      det.score = 1.0 - uniform(rng, 0.0, 1.0);
      f.dets.push_back(det);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

Observation encode_observation(const Box3D& box, const std::string& class_name, const CalibrationSet& calib,
                               const DecoderConfig& config, const std::array<double, 4>& sigmas) {
  Observation obs;
  obs.class_name = class_name;
  const Vec3 center{box.location.x, box.location.y - box.dims.h / 2.0, box.location.z};
  const Vec2 c2 = project_to_image(center, calib);
  const double s0 = config.downsample;
  obs.heatmap_cell = {std::floor(c2.x / s0), std::floor(c2.y / s0)};
  obs.offset = {c2.x - s0 * obs.heatmap_cell.x, c2.y - s0 * obs.heatmap_cell.y};

  KeypointSet kp;
  const auto corners = box_corners(box);
  for (int i = 0; i < 8; ++i) kp.points[i] = project_to_image(corners[i], calib);
  kp.points[8] = project_to_image(box.location, calib);
  kp.points[9] = project_to_image({box.location.x, box.location.y - box.dims.h, box.location.z}, calib);
  const auto group = group_line_depths(kp, calib.focal, box.dims.h);
  obs.depths = {{group[0], sigmas[0]}, {group[1], sigmas[1]}, {group[2], sigmas[2]}, {box.location.z, sigmas[3]}};

  const Dims& mean = config.class_mean_dims.at(class_name);
  obs.dim_deltas = {std::log(box.dims.h / mean.h), std::log(box.dims.w / mean.w), std::log(box.dims.l / mean.l)};

  const double alpha = global_to_local_yaw(box.yaw, box.location.x, box.location.z);
  const auto target = multibin_encode(alpha, config.num_bins);
  obs.orientation.logits.assign(static_cast<std::size_t>(config.num_bins), 0.0);
  obs.orientation.sincos.assign(static_cast<std::size_t>(config.num_bins), Vec2{0.0, 1.0});
  obs.orientation.logits[static_cast<std::size_t>(target.bin)] = 5.0;
  obs.orientation.sincos[static_cast<std::size_t>(target.bin)] = {std::sin(target.residual), std::cos(target.residual)};
  return obs;
}

std::string observation_row(const std::string& frame_id, const Observation& obs, double score, const Box2D& bbox) {
  std::string row = frame_id + " " + obs.class_name;
  auto put = [&row](double v) { row += " " + format_double(v); };
  put(obs.heatmap_cell.x), put(obs.heatmap_cell.y), put(obs.offset.x), put(obs.offset.y);
  for (const auto& d : obs.depths) put(d.z), put(d.sigma);
  for (double d : obs.dim_deltas) put(d);
  for (double l : obs.orientation.logits) put(l);
  for (const auto& sc : obs.orientation.sincos) put(sc.x), put(sc.y);
  put(score);
  put(bbox.left), put(bbox.top), put(bbox.right), put(bbox.bottom);
  return row + "\n";
}

CalibrationSet kitti_calib_with_lidar() {
  CalibrationSet c = kitti_calib();
  c.velo_to_cam = {{{0, -1, 0, 0}, {0, 0, -1, 0}, {1, 0, 0, 0}}};
  return c;
}

PointCloud rect_to_velo(std::span<const Vec3> points) {
  PointCloud cloud;
  for (const auto& p : points) {
    cloud.points.push_back({static_cast<float>(p.z), static_cast<float>(-p.x), static_cast<float>(-p.y), 0.5f});
  }
  return cloud;
}

std::vector<Vec3> scene_points(Rng& rng, std::span<const Box3D> boxes, int per_box, int clutter) {
  std::vector<Vec3> pts;
  for (const auto& b : boxes) {
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    for (int i = 0; i < per_box; ++i) {
      const double lx = uniform(rng, -b.dims.l / 2, b.dims.l / 2);
      const double ly = uniform(rng, -b.dims.h, 0.0);
      const double lz = uniform(rng, -b.dims.w / 2, b.dims.w / 2);
      pts.push_back({b.location.x + lx * c + lz * s, b.location.y + ly, b.location.z - lx * s + lz * c});
    }
    // Returns just outside the box, around its footprint.
    for (int i = 0; i < per_box / 2; ++i) {
      const double lx = uniform(rng, -b.dims.l, b.dims.l);
      const double lz = uniform(rng, -b.dims.w, b.dims.w);
      pts.push_back({b.location.x + lx * c + lz * s, b.location.y + uniform(rng, -0.05, 0.3), b.location.z - lx * s + lz * c});
    }
  }
  for (int i = 0; i < clutter; ++i) {
    pts.push_back({uniform(rng, -20, 20), uniform(rng, -2, 2), uniform(rng, -5, 60)});
  }
  return pts;
}

}  // namespace adseval::synth
