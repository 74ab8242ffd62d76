// SPDX-License-Identifier: Apache-2.0
#include "adseval/shape_labels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "adseval/errors.hpp"

namespace adseval {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Maps [lo, hi] onto cells 0..s-1; the closed upper edge folds into s-1.
int to_cell(double value, double lo, double hi, int s) {
  if (value < lo || value > hi) return -1;
  const int cell = static_cast<int>(std::floor((value - lo) / (hi - lo) * s));
  return std::min(cell, s - 1);
}

}  // namespace

std::uint64_t frame_key(std::string_view frame_id) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : frame_id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t keyed_random(std::uint64_t seed, std::uint64_t frame, std::uint64_t object, std::uint64_t cell) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ frame);
  h = splitmix64(h ^ object);
  return splitmix64(h ^ cell);
}

MaskGrid generate_mask(const MaskRequest& request, std::span<const Vec3> cloud_rect, const CalibrationSet& calib,
                       MaskTrace* trace) {
  const int s = request.grid_size;
  if (s < 1) throw std::invalid_argument("mask grid size must be >= 1");
  if (request.roi.degenerate()) throw std::invalid_argument("mask roi is degenerate");
  const std::size_t ncells = static_cast<std::size_t>(s) * s;

  std::vector<std::vector<long>> bins(ncells);
  for (std::size_t i = 0; i < cloud_rect.size(); ++i) {
    const Vec3 p = cloud_rect[i];
    if (!(p.z > 0.0)) continue;
    const Vec2 uv = project_to_image(p, calib);
    const int col = to_cell(uv.x, request.roi.left, request.roi.right, s);
    const int row = to_cell(uv.y, request.roi.top, request.roi.bottom, s);
    if (col < 0 || row < 0) continue;
    bins[static_cast<std::size_t>(row) * s + col].push_back(static_cast<long>(i));
  }

  MaskGrid grid(s);
  if (trace) {
    trace->point_count.assign(ncells, 0);
    trace->selected_point.assign(ncells, -1);
  }
  for (std::size_t cell = 0; cell < ncells; ++cell) {
    const auto& members = bins[cell];
    if (members.empty()) continue;
    const std::uint64_t r = keyed_random(request.seed, request.frame_key, request.object_key, cell);
    const auto pick = static_cast<std::size_t>((static_cast<unsigned __int128>(r) * members.size()) >> 64);
    const long chosen = members[pick];
    grid.cells[cell] = contains_point(request.box, cloud_rect[chosen]) ? kMaskForeground : kMaskBackground;
    if (trace) {
      trace->point_count[cell] = static_cast<int>(members.size());
      trace->selected_point[cell] = chosen;
    }
  }
  return grid;
}

std::string write_mask(const MaskGrid& grid) {
  std::string out = "s=" + std::to_string(grid.size) + "\n";
  for (int r = 0; r < grid.size; ++r) {
    for (int c = 0; c < grid.size; ++c) {
      if (c) out += ' ';
      out += std::to_string(static_cast<int>(grid.at(r, c)));
    }
    out += '\n';
  }
  return out;
}

MaskGrid parse_mask(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header) || header.rfind("s=", 0) != 0) throw FormatError("mask header 's=<n>' missing", 1);
  int s = 0;
  try {
    s = std::stoi(header.substr(2));
  } catch (const std::exception&) {
    throw FormatError("bad mask size in header", 1);
  }
  if (s < 1) throw FormatError("mask size must be >= 1", 1);
  MaskGrid grid(s);
  for (int r = 0; r < s; ++r) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("mask has fewer than " + std::to_string(s) + " rows", r + 2);
    std::istringstream row(line);
    for (int c = 0; c < s; ++c) {
      int v = 0;
      if (!(row >> v) || v < -1 || v > 1) throw FormatError("bad mask value", r + 2);
      grid.at(r, c) = static_cast<std::int8_t>(v);
    }
    std::string extra;
    if (row >> extra) throw FormatError("too many values in mask row", r + 2);
  }
  return grid;
}

PositionEmbedding position_embedding(int s) {
  if (s < 1) throw std::invalid_argument("position embedding size must be >= 1");
  PositionEmbedding pe;
  pe.size = s;
  pe.values.reserve(static_cast<std::size_t>(s) * s);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      pe.values.push_back({static_cast<double>(x) / s - 0.5, static_cast<double>(y) / s - 0.5});
    }
  }
  return pe;
}

CenterAssignment center_sampling(std::span<const LatticePoint> centers, int width, int height) {
  if (width < 0 || height < 0) throw std::invalid_argument("lattice dimensions must be non-negative");
  CenterAssignment out{width, height, std::vector<int>(static_cast<std::size_t>(width) * height, -1)};
  std::vector<long> best_d2(out.owner.size(), 0);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto [cu, cv] = centers[k];
    for (int dv = -1; dv <= 1; ++dv) {
      for (int du = -1; du <= 1; ++du) {
        const int u = cu + du;
        const int v = cv + dv;
        if (u < 0 || v < 0 || u >= width || v >= height) continue;
        const std::size_t idx = static_cast<std::size_t>(v) * width + u;
        const long d2 = static_cast<long>(du) * du + static_cast<long>(dv) * dv;
        // Centers are visited in index order, so a strict comparison keeps the lowest index on ties.
        if (out.owner[idx] < 0 || d2 < best_d2[idx]) {
          out.owner[idx] = static_cast<int>(k);
          best_d2[idx] = d2;
        }
      }
    }
  }
  return out;
}

}  // namespace adseval
