// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adseval/geom3d.hpp"
#include "adseval/kitti_io.hpp"

namespace adseval {

inline constexpr std::int8_t kMaskForeground = 1;
inline constexpr std::int8_t kMaskBackground = 0;
inline constexpr std::int8_t kMaskUnknown = -1;

// s x s instance-mask label grid, row-major. Cells hold 1 (foreground),
// 0 (background) or -1 (no LiDAR evidence).
struct MaskGrid {
  int size = 0;
  std::vector<std::int8_t> cells;

  MaskGrid() = default;
  explicit MaskGrid(int s) : size(s), cells(static_cast<std::size_t>(s) * s, kMaskUnknown) {}
  std::int8_t at(int row, int col) const { return cells[static_cast<std::size_t>(row) * size + col]; }
  std::int8_t& at(int row, int col) { return cells[static_cast<std::size_t>(row) * size + col]; }
  friend bool operator==(const MaskGrid&, const MaskGrid&) = default;
};

struct MaskRequest {
  Box3D box;                 // target object
  Box2D roi;                 // image region resampled onto the grid
  int grid_size = 28;
  std::uint64_t seed = 0;
  std::uint64_t frame_key = 0;   // see frame_key()
  std::uint64_t object_key = 0;  // object index within the frame
};

// Per-cell bookkeeping, exposed for verification.
struct MaskTrace {
  std::vector<int> point_count;     // points that landed in each cell
  std::vector<long> selected_point; // index into the cloud, -1 when empty
};

// Projects every point with z > 0, bins it into the s x s grid laid over the
// roi, and labels each occupied cell from one of its points chosen uniformly
// at random: 1 if that point lies inside the target box, else 0. The choice
// is keyed by (seed, frame, object, cell), so it does not depend on
// scheduling.
MaskGrid generate_mask(const MaskRequest& request, std::span<const Vec3> cloud_rect, const CalibrationSet& calib,
                       MaskTrace* trace = nullptr);

// "s=<n>" header, then s rows of s space-separated values.
std::string write_mask(const MaskGrid& grid);
MaskGrid parse_mask(std::string_view text);

// FNV-1a hash of a frame id, used as the frame part of the mask RNG key.
std::uint64_t frame_key(std::string_view frame_id);

// Counter-based generator: a fixed mixing function of its inputs.
std::uint64_t keyed_random(std::uint64_t seed, std::uint64_t frame, std::uint64_t object, std::uint64_t cell);

// Linear coordinate map (x / s - 0.5, y / s - 0.5) for every pixel.
struct PositionEmbedding {
  int size = 0;
  std::vector<Vec2> values;  // row-major, x = column term, y = row term
  Vec2 at(int x, int y) const { return values[static_cast<std::size_t>(y) * size + x]; }
};
PositionEmbedding position_embedding(int s);

struct LatticePoint {
  int u = 0;
  int v = 0;
};

// Object index per heatmap pixel, or -1.
struct CenterAssignment {
  int width = 0;
  int height = 0;
  std::vector<int> owner;
  int at(int u, int v) const { return owner[static_cast<std::size_t>(v) * width + u]; }
};

// Pixels in the union of the 3x3 neighborhoods of the centers go to the
// Euclidean-nearest center (lowest index on ties).
CenterAssignment center_sampling(std::span<const LatticePoint> centers, int width, int height);

}  // namespace adseval
