// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adseval/types.hpp"

namespace adseval {

// One row of a KITTI label or prediction file. Angles are wrapped into
// [-pi, pi] by the parser. DontCare rows keep their placeholder geometry.
struct ObjectLabel {
  std::string class_name;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Box2D bbox;
  Dims dims;
  Vec3 location;  // bottom-face center, rectified camera frame
  double rotation_y = 0.0;
  std::optional<double> score;

  bool is_dont_care() const { return class_name == "DontCare"; }
  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

struct CalibrationSet {
  Mat34 projection{};   // P2, row-major
  double focal = 0.0;   // projection[0][0]
  Vec2 principal;       // (projection[0][2], projection[1][2])
  Mat34 velo_to_cam{};  // Tr_velo_to_cam
  Mat33 rect{};         // R0_rect

  // Builds a pinhole-only calibration with identity extrinsics.
  static CalibrationSet pinhole(double focal, double cu, double cv);
};

struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float reflectance = 0.0f;
  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct PointCloud {
  std::vector<LidarPoint> points;
};

// Parses a label file. Ground truth has 15 fields per line, predictions 16.
// Blank lines are skipped; everything else yields a label or throws
// ParseError / FormatError with the 1-based line number.
std::vector<ObjectLabel> parse_label_file(std::string_view text, bool expect_scores);

// Serializes labels with shortest round-trip number formatting. A label
// carries a 16th field iff it has a score. Throws SerializationError on
// non-finite values.
std::string write_label_file(std::span<const ObjectLabel> labels);

// Reads P2, Tr_velo_to_cam and R0_rect; other keys are ignored.
CalibrationSet parse_calib_file(std::string_view text);
std::string write_calib_file(const CalibrationSet& calib);

PointCloud parse_velodyne(std::span<const std::byte> bytes);
std::vector<std::byte> write_velodyne(const PointCloud& cloud);

// p_rect = R0_rect * (Tr_velo_to_cam * [p; 1]). Reflectance is dropped.
std::vector<Vec3> velo_to_rect(const PointCloud& cloud, const CalibrationSet& calib);

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace adseval
