// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "adseval/kitti_io.hpp"
#include "adseval/types.hpp"

namespace adseval {

// Oriented box in the rectified camera frame (x right, y down, z forward).
// `location` is the bottom-face center; the box occupies y in [y - h, y].
struct Box3D {
  Vec3 location;
  Dims dims;
  double yaw = 0.0;  // rotation about the camera y axis

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

Box3D box_from_label(const ObjectLabel& label);

// Footprint on the x-z ground plane, counter-clockwise with (x, z) taken as
// a right-handed 2D frame.
struct BevPolygon {
  std::array<Vec2, 4> vertices;
};

// Corners 0..3 lie on the bottom face (y = location.y), 4..7 on the top face;
// corner i + 4 sits directly above corner i. Pairs {0, 2} and {1, 3} are the
// diagonals of each face.
std::array<Vec3, 8> box_corners(const Box3D& box);

BevPolygon bev_footprint(const Box3D& box);

// Pinhole projection with the focal length and principal point only. The
// stereo baseline term in P2[0][3] is intentionally unused.
Vec2 project_to_image(Vec3 point, const CalibrationSet& calib);

double iou_2d(const Box2D& a, const Box2D& b);

double polygon_area(const std::vector<Vec2>& polygon);

// Area of the intersection of two convex CCW polygons (Sutherland-Hodgman
// clip followed by the shoelace formula). Touching polygons give 0.
double convex_intersection_area(const BevPolygon& p, const BevPolygon& q);

double iou_bev(const Box3D& a, const Box3D& b);
double iou_3d(const Box3D& a, const Box3D& b);

// Inclusive containment against all six faces.
bool contains_point(const Box3D& box, Vec3 p);

// Global yaw from the observation angle: wrap(alpha + atan2(x, z)).
// Throws DomainError for z <= 0.
double local_to_global_yaw(double alpha, double x, double z);

// Inverse of local_to_global_yaw.
double global_to_local_yaw(double rotation_y, double x, double z);

}  // namespace adseval
