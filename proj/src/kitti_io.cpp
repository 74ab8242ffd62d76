// SPDX-License-Identifier: Apache-2.0
#include "adseval/kitti_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

#include "adseval/angles.hpp"
#include "adseval/errors.hpp"

namespace adseval {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Splits on '\n', keeping 1-based line numbers. A trailing '\r' is stripped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    fn(lineno, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

double to_double(std::string_view tok, std::size_t lineno, const char* field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(lineno, std::string("cannot parse ") + field + " from '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(lineno, std::string("non-finite ") + field);
  }
  return v;
}

int to_int(std::string_view tok, std::size_t lineno, const char* field) {
  const double v = to_double(tok, lineno, field);
  if (v != std::floor(v) || std::fabs(v) > 1e6) {
    throw ParseError(lineno, std::string(field) + " must be an integer, got '" + std::string(tok) + "'");
  }
  return static_cast<int>(v);
}

void check_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw SerializationError(std::string("non-finite ") + field);
}

}  // namespace

CalibrationSet CalibrationSet::pinhole(double focal, double cu, double cv) {
  CalibrationSet c;
  c.projection = {{{focal, 0.0, cu, 0.0}, {0.0, focal, cv, 0.0}, {0.0, 0.0, 1.0, 0.0}}};
  c.focal = focal;
  c.principal = {cu, cv};
  c.velo_to_cam = {{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}};
  c.rect = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  return c;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw SerializationError("cannot format number");
  return std::string(buf, ptr);
}

std::vector<ObjectLabel> parse_label_file(std::string_view text, bool expect_scores) {
  const std::size_t expected = expect_scores ? 16 : 15;
  std::vector<ObjectLabel> labels;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    const auto tok = split_ws(line);
    if (tok.empty()) return;
    if (tok.size() == 15 || tok.size() == 16) {
      if (tok.size() != expected) {
        throw FormatError("expected " + std::to_string(expected) + " fields (" +
                              (expect_scores ? "prediction" : "ground truth") + "), found " +
                              std::to_string(tok.size()),
                          lineno);
      }
    } else {
      throw ParseError(lineno, "expected " + std::to_string(expected) + " fields, found " +
                                   std::to_string(tok.size()));
    }
    ObjectLabel l;
    l.class_name = std::string(tok[0]);
    l.truncation = to_double(tok[1], lineno, "truncation");
    l.occlusion = to_int(tok[2], lineno, "occlusion");
    l.alpha = wrap_angle(to_double(tok[3], lineno, "alpha"));
    l.bbox = {to_double(tok[4], lineno, "bbox left"), to_double(tok[5], lineno, "bbox top"),
              to_double(tok[6], lineno, "bbox right"), to_double(tok[7], lineno, "bbox bottom")};
    l.dims = {to_double(tok[8], lineno, "height"), to_double(tok[9], lineno, "width"),
              to_double(tok[10], lineno, "length")};
    l.location = {to_double(tok[11], lineno, "x"), to_double(tok[12], lineno, "y"),
                  to_double(tok[13], lineno, "z")};
    l.rotation_y = wrap_angle(to_double(tok[14], lineno, "rotation_y"));
    if (expect_scores) l.score = to_double(tok[15], lineno, "score");
    labels.push_back(std::move(l));
  });
  return labels;
}

std::string write_label_file(std::span<const ObjectLabel> labels) {
  std::string out;
  for (const auto& l : labels) {
    if (l.class_name.empty() || l.class_name.find_first_of(" \t\r\n") != std::string::npos) {
      throw SerializationError("class name must be a single non-empty token");
    }
    const double fields[] = {l.truncation, l.bbox.left, l.bbox.top, l.bbox.right, l.bbox.bottom,
                             l.dims.h,     l.dims.w,    l.dims.l,   l.location.x, l.location.y,
                             l.location.z, l.alpha,     l.rotation_y};
    for (double v : fields) check_finite(v, "label field");
    if (l.score) check_finite(*l.score, "score");

    out += l.class_name;
    out += ' ' + format_double(l.truncation);
    out += ' ' + std::to_string(l.occlusion);
    out += ' ' + format_double(wrap_angle(l.alpha));
    for (double v : {l.bbox.left, l.bbox.top, l.bbox.right, l.bbox.bottom, l.dims.h, l.dims.w,
                     l.dims.l, l.location.x, l.location.y, l.location.z}) {
      out += ' ' + format_double(v);
    }
    out += ' ' + format_double(wrap_angle(l.rotation_y));
    if (l.score) out += ' ' + format_double(*l.score);
    out += '\n';
  }
  return out;
}

CalibrationSet parse_calib_file(std::string_view text) {
  std::map<std::string, std::pair<std::size_t, std::vector<double>>> entries;
  for_each_line(text, [&](std::size_t lineno, std::string_view line) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) return;
    auto key = split_ws(line.substr(0, colon));
    if (key.size() != 1) return;
    std::vector<double> values;
    for (auto tok : split_ws(line.substr(colon + 1))) values.push_back(to_double(tok, lineno, "calibration value"));
    entries[std::string(key[0])] = {lineno, std::move(values)};
  });

  auto fetch = [&](const std::string& key, std::size_t count) -> const std::vector<double>& {
    auto it = entries.find(key);
    if (it == entries.end()) throw FormatError("calibration key '" + key + "' is missing");
    const auto& [lineno, values] = it->second;
    if (values.size() != count) {
      throw FormatError("calibration key '" + key + "' needs " + std::to_string(count) + " values, found " +
                            std::to_string(values.size()),
                        lineno);
    }
    return values;
  };

  CalibrationSet c;
  const auto& p2 = fetch("P2", 12);
  const auto& tr = fetch("Tr_velo_to_cam", 12);
  const auto& r0 = fetch("R0_rect", 9);
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 4; ++k) {
      c.projection[r][k] = p2[r * 4 + k];
      c.velo_to_cam[r][k] = tr[r * 4 + k];
    }
    for (int k = 0; k < 3; ++k) c.rect[r][k] = r0[r * 3 + k];
  }
  c.focal = c.projection[0][0];
  c.principal = {c.projection[0][2], c.projection[1][2]};

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += c.rect[i][k] * c.rect[j][k];
      if (std::fabs(d - (i == j ? 1.0 : 0.0)) > 1e-6) {
        throw ValidationError("R0_rect is not orthonormal (row product " + std::to_string(i) + "," +
                              std::to_string(j) + " = " + format_double(d) + ")");
      }
    }
  }
  return c;
}

std::string write_calib_file(const CalibrationSet& calib) {
  std::string out = "P2:";
  for (const auto& row : calib.projection)
    for (double v : row) out += ' ' + format_double(v);
  out += "\nR0_rect:";
  for (const auto& row : calib.rect)
    for (double v : row) out += ' ' + format_double(v);
  out += "\nTr_velo_to_cam:";
  for (const auto& row : calib.velo_to_cam)
    for (double v : row) out += ' ' + format_double(v);
  out += '\n';
  return out;
}

namespace {

float load_f32_le(const std::byte* p) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  return std::bit_cast<float>(bits);
}

void store_f32_le(float v, std::byte* p) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  std::memcpy(p, &bits, 4);
}

}  // namespace

PointCloud parse_velodyne(std::span<const std::byte> bytes) {
  if (bytes.size() % 16 != 0) {
    throw FormatError("velodyne payload of " + std::to_string(bytes.size()) +
                      " bytes is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const std::byte* p = bytes.data() + off;
    cloud.points.push_back({load_f32_le(p), load_f32_le(p + 4), load_f32_le(p + 8), load_f32_le(p + 12)});
  }
  return cloud;
}

std::vector<std::byte> write_velodyne(const PointCloud& cloud) {
  std::vector<std::byte> out(cloud.points.size() * 16);
  std::byte* p = out.data();
  for (const auto& pt : cloud.points) {
    store_f32_le(pt.x, p);
    store_f32_le(pt.y, p + 4);
    store_f32_le(pt.z, p + 8);
    store_f32_le(pt.reflectance, p + 12);
    p += 16;
  }
  return out;
}

std::vector<Vec3> velo_to_rect(const PointCloud& cloud, const CalibrationSet& calib) {
  std::vector<Vec3> out;
  out.reserve(cloud.points.size());
  const auto& t = calib.velo_to_cam;
  const auto& r = calib.rect;
  for (const auto& pt : cloud.points) {
    const double v[3] = {pt.x, pt.y, pt.z};
    double cam[3];
    for (int i = 0; i < 3; ++i) cam[i] = t[i][0] * v[0] + t[i][1] * v[1] + t[i][2] * v[2] + t[i][3];
    Vec3 q;
    q.x = r[0][0] * cam[0] + r[0][1] * cam[1] + r[0][2] * cam[2];
    q.y = r[1][0] * cam[0] + r[1][1] * cam[1] + r[1][2] * cam[2];
    q.z = r[2][0] * cam[0] + r[2][1] * cam[1] + r[2][2] * cam[2];
    out.push_back(q);
  }
  return out;
}

}  // namespace adseval
