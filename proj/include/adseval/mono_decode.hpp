// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "adseval/geom3d.hpp"
#include "adseval/kitti_io.hpp"

namespace adseval {

// Ten projected keypoints: indices 0..7 follow box_corners(), 8 is the
// bottom-face center and 9 the top-face center. Five vertical lines join
// (k, k + 4) for k = 0..3 and (8, 9).
struct KeypointSet {
  std::array<Vec2, 10> points;
};

struct DepthEstimate {
  double z = 0.0;
  double sigma = 1.0;
};

struct DecoderConfig {
  int downsample = 4;
  std::map<std::string, Dims> class_mean_dims;
  int num_bins = 4;

  // KITTI training-set class means for Car, Pedestrian and Cyclist.
  static DecoderConfig kitti_defaults();
  void validate() const;
};

// Per-bin classification logits and (sin, cos) residual regressions.
struct BinOutputs {
  std::vector<double> logits;
  std::vector<Vec2> sincos;  // x = sin, y = cos
};

// Raw per-object regression outputs, as a center-based detector would emit.
struct Observation {
  std::string class_name;
  Vec2 heatmap_cell;  // (u_f, v_f)
  Vec2 offset;        // (delta_u, delta_v) in pixels
  std::vector<DepthEstimate> depths;
  std::array<double, 3> dim_deltas{};  // (delta_h, delta_w, delta_l)
  BinOutputs orientation;
};

struct DecodedObject {
  Box3D box;
  double alpha = 0.0;
  Vec2 center2d;
};

inline constexpr double kMinLinePixels = 0.5;

double depth_from_line(double focal, double height_3d, double pixel_height);

// Pixel heights (bottom v - top v) of the five vertical lines.
std::array<double, 5> line_pixel_heights(const KeypointSet& keypoints);

// Depths of the three line groups: diagonal corner lines {0, 2}, diagonal
// corner lines {1, 3}, and the center line. Lines at or below
// kMinLinePixels throw DegenerateLineError.
std::array<double, 3> group_line_depths(const KeypointSet& keypoints, double focal, double height_3d);

// Uncertainty-weighted mean: sum(z / sigma) / sum(1 / sigma).
double fuse_depths(std::span<const DepthEstimate> estimates);

Vec2 decode_center(Vec2 heatmap_cell, Vec2 offset, const DecoderConfig& config);

Vec3 backproject(Vec2 center, double z, const CalibrationSet& calib);

Dims decode_dimensions(const std::string& class_name, const std::array<double, 3>& deltas,
                       const DecoderConfig& config);

double multibin_bin_center(int bin, int num_bins);
int multibin_bin_of(double alpha, int num_bins);

struct MultibinTarget {
  int bin = 0;
  double residual = 0.0;
};
MultibinTarget multibin_encode(double alpha, int num_bins);

// Argmax bin (lowest index on ties) plus atan2 of its residual.
double multibin_decode(const BinOutputs& outputs);

// fuse_depths -> backproject -> decode_dimensions -> multibin_decode ->
// local_to_global_yaw. The decoded center is the projected 3D box center,
// so the bottom-face location sits h / 2 below it.
DecodedObject decode_object(const Observation& obs, const CalibrationSet& calib, const DecoderConfig& config);

Box3D assemble_box(const Observation& obs, const CalibrationSet& calib, const DecoderConfig& config);

}  // namespace adseval
