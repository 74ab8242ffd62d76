// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "adseval/dataset.hpp"
#include "adseval/geom3d.hpp"
#include "adseval/mono_decode.hpp"

namespace adseval::synth {

using Rng = std::mt19937_64;

// KITTI-like left color camera: f = 721.5377, principal point (609.5593, 172.854).
CalibrationSet kitti_calib();

double uniform(Rng& rng, double lo, double hi);

// A rotated box with positive dimensions, centered near the origin.
Box3D random_box(Rng& rng, double extent = 6.0);

// A box whose eight corners are in front of the camera and inside a
// 1242 x 375 image.
Box3D random_visible_box(Rng& rng, const CalibrationSet& calib, double z_min, double z_max, const Dims& mean);

// Label for a box: 2D box from the projected corners, alpha from rotation_y.
ObjectLabel label_from_box(const Box3D& box, const CalibrationSet& calib, const std::string& class_name,
                           std::optional<double> score = std::nullopt);

// Moves a label along its viewing ray to depth z, keeping the 2D box.
ObjectLabel shift_along_ray(const ObjectLabel& label, double z);

// Small multi-frame scene with random overlapping ground truths and
// detections, mixed classes, difficulties and DontCare regions.
struct SceneOptions {
  int max_frames = 3;
  int max_objects = 20;  // ground truths plus detections
  bool quantized_scores = false;
};
std::vector<Frame> random_scene(Rng& rng, const SceneOptions& options = {});

// Ground-truth Cars at z in [z_min, z_max] with one detection each: the
// ground truth moved along its viewing ray by Gaussian depth noise, 2D box
// unchanged, score uniform in (0, 1].
struct AttackFixtureOptions {
  int frames = 50;
  int min_objects = 2;
  int max_objects = 6;
  double z_min = 10.0;
  double z_max = 70.0;
  double depth_sigma = 1.5;
  std::uint64_t seed = 2024;
};
std::vector<Frame> attack_fixture(const AttackFixtureOptions& options = {});

// Observation that decodes back to `box` under `calib` and `config`: the
// heatmap cell and offset of the projected 3D center, three keypoint-line
// depths plus the true depth with the given uncertainties, log-ratio
// dimension deltas, and one-hot MultiBin outputs.
Observation encode_observation(const Box3D& box, const std::string& class_name, const CalibrationSet& calib,
                               const DecoderConfig& config, const std::array<double, 4>& sigmas = {1.0, 1.0, 1.0, 1.0});

// One row of the `decode` command's observation format.
std::string observation_row(const std::string& frame_id, const Observation& obs, double score, const Box2D& bbox);

// kitti_calib() with the KITTI axis convention between LiDAR and camera:
// camera (x, y, z) = LiDAR (-y, -z, x).
CalibrationSet kitti_calib_with_lidar();

// Inverse of the extrinsics of kitti_calib_with_lidar().
PointCloud rect_to_velo(std::span<const Vec3> points);

// Points uniform inside each box, plus ground-plane returns and clutter in
// front of the camera.
std::vector<Vec3> scene_points(Rng& rng, std::span<const Box3D> boxes, int per_box, int clutter);

}  // namespace adseval::synth
