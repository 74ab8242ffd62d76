// SPDX-License-Identifier: Apache-2.0
#include "adseval/mono_decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adseval/angles.hpp"
#include "adseval/errors.hpp"

namespace adseval {

DecoderConfig DecoderConfig::kitti_defaults() {
  DecoderConfig c;
  c.class_mean_dims = {
      {"Car", {1.52563191, 1.62856739, 3.88311640}},
      {"Pedestrian", {1.76255119, 0.66068622, 0.84422524}},
      {"Cyclist", {1.73698127, 0.59706367, 1.76282397}},
  };
  return c;
}

void DecoderConfig::validate() const {
  if (downsample < 1) throw std::invalid_argument("downsample must be >= 1");
  if (num_bins < 1) throw std::invalid_argument("num_bins must be >= 1");
  for (const auto& [cls, d] : class_mean_dims) {
    if (!(d.h > 0 && d.w > 0 && d.l > 0)) {
      throw std::invalid_argument("mean dimensions for '" + cls + "' must be positive");
    }
  }
}

double depth_from_line(double focal, double height_3d, double pixel_height) {
  if (!(pixel_height > 0.0)) throw DegenerateLineError(-1, pixel_height);
  return focal * height_3d / pixel_height;
}

std::array<double, 5> line_pixel_heights(const KeypointSet& kp) {
  std::array<double, 5> h{};
  for (int k = 0; k < 4; ++k) h[k] = kp.points[k].y - kp.points[k + 4].y;
  h[4] = kp.points[8].y - kp.points[9].y;
  return h;
}

std::array<double, 3> group_line_depths(const KeypointSet& keypoints, double focal, double height_3d) {
  const auto heights = line_pixel_heights(keypoints);
  std::array<double, 5> z{};
  for (int i = 0; i < 5; ++i) {
    if (!(heights[i] > kMinLinePixels)) throw DegenerateLineError(i, heights[i]);
    z[i] = depth_from_line(focal, height_3d, heights[i]);
  }
  return {(z[0] + z[2]) / 2.0, (z[1] + z[3]) / 2.0, z[4]};
}

double fuse_depths(std::span<const DepthEstimate> estimates) {
  if (estimates.empty()) throw std::invalid_argument("fuse_depths: empty ensemble");
  double num = 0.0;
  double den = 0.0;
  for (const auto& e : estimates) {
    if (!(e.sigma > 0.0)) throw DomainError("fuse_depths: uncertainty must be positive");
    num += e.z / e.sigma;
    den += 1.0 / e.sigma;
  }
  return num / den;
}

Vec2 decode_center(Vec2 heatmap_cell, Vec2 offset, const DecoderConfig& config) {
  const double s0 = config.downsample;
  return {s0 * heatmap_cell.x + offset.x, s0 * heatmap_cell.y + offset.y};
}

Vec3 backproject(Vec2 center, double z, const CalibrationSet& calib) {
  if (!(z > 0.0)) throw DomainError("backproject requires z > 0");
  return {(center.x - calib.principal.x) * z / calib.focal, (center.y - calib.principal.y) * z / calib.focal, z};
}

Dims decode_dimensions(const std::string& class_name, const std::array<double, 3>& deltas,
                       const DecoderConfig& config) {
  auto it = config.class_mean_dims.find(class_name);
  if (it == config.class_mean_dims.end()) throw MissingPriorError(class_name);
  const Dims& m = it->second;
  return {m.h * std::exp(deltas[0]), m.w * std::exp(deltas[1]), m.l * std::exp(deltas[2])};
}

double multibin_bin_center(int bin, int num_bins) {
  return -kPi + (2.0 * bin + 1.0) * kPi / num_bins;
}

int multibin_bin_of(double alpha, int num_bins) {
  const double width = 2.0 * kPi / num_bins;
  const int bin = static_cast<int>(std::floor((wrap_angle(alpha) + kPi) / width));
  return std::clamp(bin, 0, num_bins - 1);
}

MultibinTarget multibin_encode(double alpha, int num_bins) {
  const int bin = multibin_bin_of(alpha, num_bins);
  return {bin, wrap_angle(alpha - multibin_bin_center(bin, num_bins))};
}

double multibin_decode(const BinOutputs& outputs) {
  if (outputs.logits.empty()) throw std::invalid_argument("multibin_decode: no bins");
  if (outputs.sincos.size() != outputs.logits.size()) {
    throw std::invalid_argument("multibin_decode: logits and sin/cos pairs differ in count");
  }
  const auto best = std::max_element(outputs.logits.begin(), outputs.logits.end());
  const int bin = static_cast<int>(best - outputs.logits.begin());
  const Vec2 sc = outputs.sincos[bin];
  if (sc.x == 0.0 && sc.y == 0.0) throw DomainError("multibin_decode: zero-norm sin/cos in winning bin");
  const int n = static_cast<int>(outputs.logits.size());
  return wrap_angle(multibin_bin_center(bin, n) + std::atan2(sc.x, sc.y));
}

DecodedObject decode_object(const Observation& obs, const CalibrationSet& calib, const DecoderConfig& config) {
  const Vec2 center = decode_center(obs.heatmap_cell, obs.offset, config);
  const double z = fuse_depths(obs.depths);
  const Vec3 c3 = backproject(center, z, calib);
  const Dims dims = decode_dimensions(obs.class_name, obs.dim_deltas, config);
  const double alpha = multibin_decode(obs.orientation);
  const double ry = local_to_global_yaw(alpha, c3.x, c3.z);
  DecodedObject out;
  out.box = {{c3.x, c3.y + dims.h / 2.0, c3.z}, dims, ry};
  out.alpha = alpha;
  out.center2d = center;
  return out;
}

Box3D assemble_box(const Observation& obs, const CalibrationSet& calib, const DecoderConfig& config) {
  return decode_object(obs, calib, config).box;
}

}  // namespace adseval
