// SPDX-License-Identifier: Apache-2.0
#include "adseval/geom3d.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "adseval/angles.hpp"
#include "adseval/errors.hpp"

namespace adseval {
namespace {

constexpr double kClipEps = 1e-9;

// Rotation about +y by `yaw` applied to a local (x, z) offset.
Vec2 rotate_xz(double lx, double lz, double c, double s) { return {lx * c + lz * s, -lx * s + lz * c}; }

// Sutherland-Hodgman: keep the part of `subject` left of the directed edge a->b.
std::vector<Vec2> clip_by_edge(const std::vector<Vec2>& subject, Vec2 a, Vec2 b) {
  std::vector<Vec2> out;
  if (subject.empty()) return out;
  const Vec2 edge = b - a;
  const double scale = std::max(1.0, std::hypot(edge.x, edge.y));
  auto side = [&](Vec2 p) { return cross(edge, p - a) / scale; };

  Vec2 prev = subject.back();
  double prev_side = side(prev);
  for (const Vec2& cur : subject) {
    const double cur_side = side(cur);
    const bool cur_in = cur_side >= -kClipEps;
    const bool prev_in = prev_side >= -kClipEps;
    if (cur_in) {
      if (!prev_in) {
        const double t = prev_side / (prev_side - cur_side);
        out.push_back(prev + (cur - prev) * t);
      }
      out.push_back(cur);
    } else if (prev_in) {
      const double t = prev_side / (prev_side - cur_side);
      out.push_back(prev + (cur - prev) * t);
    }
    prev = cur;
    prev_side = cur_side;
  }
  return out;
}

auto box_key(const Box3D& b) {
  return std::make_tuple(b.location.x, b.location.y, b.location.z, b.dims.h, b.dims.w, b.dims.l, b.yaw);
}

// Evaluates a binary overlap in a canonical argument order so that the result
// is bitwise symmetric.
template <typename Fn>
double symmetric(const Box3D& a, const Box3D& b, Fn&& fn) {
  return box_key(b) < box_key(a) ? fn(b, a) : fn(a, b);
}

double footprint_area(const Box3D& b) {
  const BevPolygon fp = bev_footprint(b);
  return polygon_area({fp.vertices.begin(), fp.vertices.end()});
}

}  // namespace

Box3D box_from_label(const ObjectLabel& label) { return {label.location, label.dims, label.rotation_y}; }

std::array<Vec3, 8> box_corners(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = box.dims.l / 2.0;
  const double hw = box.dims.w / 2.0;
  const std::array<std::pair<double, double>, 4> local = {{{hl, -hw}, {hl, hw}, {-hl, hw}, {-hl, -hw}}};
  std::array<Vec3, 8> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 r = rotate_xz(local[i].first, local[i].second, c, s);
    out[i] = {box.location.x + r.x, box.location.y, box.location.z + r.y};
    out[i + 4] = {box.location.x + r.x, box.location.y - box.dims.h, box.location.z + r.y};
  }
  return out;
}

BevPolygon bev_footprint(const Box3D& box) {
  const auto corners = box_corners(box);
  BevPolygon p;
  for (std::size_t i = 0; i < 4; ++i) p.vertices[i] = {corners[i].x, corners[i].z};
  return p;
}

Vec2 project_to_image(Vec3 point, const CalibrationSet& calib) {
  if (!(point.z > 0.0)) throw DomainError("cannot project a point at or behind the camera (z <= 0)");
  return {calib.focal * point.x / point.z + calib.principal.x, calib.focal * point.y / point.z + calib.principal.y};
}

double iou_2d(const Box2D& a, const Box2D& b) {
  if (a.degenerate() || b.degenerate()) return 0.0;
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  // a.area() + b.area() is commutative, so the result is symmetric.
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double polygon_area(const std::vector<Vec2>& polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return twice / 2.0;
}

double convex_intersection_area(const BevPolygon& p, const BevPolygon& q) {
  std::vector<Vec2> poly(p.vertices.begin(), p.vertices.end());
  for (std::size_t i = 0; i < q.vertices.size() && !poly.empty(); ++i) {
    poly = clip_by_edge(poly, q.vertices[i], q.vertices[(i + 1) % q.vertices.size()]);
  }
  return std::max(0.0, polygon_area(poly));
}

double iou_bev(const Box3D& a, const Box3D& b) {
  return symmetric(a, b, [](const Box3D& p, const Box3D& q) {
    const double inter = convex_intersection_area(bev_footprint(p), bev_footprint(q));
    if (inter <= 0.0) return 0.0;
    const double uni = footprint_area(p) + footprint_area(q) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
  });
}

double iou_3d(const Box3D& a, const Box3D& b) {
  return symmetric(a, b, [](const Box3D& p, const Box3D& q) {
    const double p_top = p.location.y - p.dims.h;
    const double q_top = q.location.y - q.dims.h;
    const double y_overlap = std::min(p.location.y, q.location.y) - std::max(p_top, q_top);
    if (y_overlap <= 0.0) return 0.0;
    const double inter = convex_intersection_area(bev_footprint(p), bev_footprint(q));
    if (inter <= 0.0) return 0.0;
    const double overlap = inter * y_overlap;
    // Volumes use the same interval arithmetic as the overlap so a box
    // compared with itself yields exactly 1.
    const double vol_p = footprint_area(p) * (p.location.y - p_top);
    const double vol_q = footprint_area(q) * (q.location.y - q_top);
    return std::clamp(overlap / (vol_p + vol_q - overlap), 0.0, 1.0);
  });
}

bool contains_point(const Box3D& box, Vec3 p) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double dx = p.x - box.location.x;
  const double dz = p.z - box.location.z;
  // Inverse of rotate_xz.
  const double lx = dx * c - dz * s;
  const double lz = dx * s + dz * c;
  const double dy = p.y - box.location.y;
  return std::fabs(lx) <= box.dims.l / 2.0 && std::fabs(lz) <= box.dims.w / 2.0 && dy <= 0.0 &&
         dy >= -box.dims.h;
}

double local_to_global_yaw(double alpha, double x, double z) {
  if (!(z > 0.0)) throw DomainError("local_to_global_yaw requires z > 0");
  return wrap_angle(alpha + std::atan2(x, z));
}

double global_to_local_yaw(double rotation_y, double x, double z) {
  if (!(z > 0.0)) throw DomainError("global_to_local_yaw requires z > 0");
  return wrap_angle(rotation_y - std::atan2(x, z));
}

}  // namespace adseval
