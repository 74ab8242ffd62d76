// SPDX-License-Identifier: Apache-2.0
#pragma once

// Slow, independent reference computations used to check the production
// kernels. Nothing here calls the code path it is meant to verify.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "adseval/eval.hpp"
#include "adseval/geom3d.hpp"

namespace adseval::oracle {

// Corners from an explicit R_y matrix product, same ordering as box_corners().
std::array<Vec3, 8> corners(const Box3D& box);

// Six outward face planes built from corners(); inside iff on the inner side
// of every plane (inclusive).
bool halfspace_contains(const Box3D& box, Vec3 p);

// Counts pixel centers on a regular grid of the given pitch.
double raster_iou_2d(const Box2D& a, const Box2D& b, double pitch);

// Uniform Monte-Carlo estimate over the joint bounding region.
double mc_convex_intersection_area(const BevPolygon& p, const BevPolygon& q, std::size_t samples, std::uint64_t seed);
double mc_iou_bev(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed);
double mc_iou_3d(const Box3D& a, const Box3D& b, std::size_t samples, std::uint64_t seed);

// Ground-truth selection re-implemented from the protocol rules.
std::vector<GtStatus> reference_status(std::span<const ObjectLabel> gts, const EvalConfig& config);

// Greedy replay: at each step the highest-scoring remaining detection
// (lowest index on ties) claims the best unclaimed Evaluate ground truth.
struct ReplayCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t ignored = 0;
  double depth_similarity_sum = 0.0;
  double orientation_similarity_sum = 0.0;
};
ReplayCounts replay_frame(std::span<const ObjectLabel> gts, std::span<const GtStatus> status,
                          std::span<const ObjectLabel> dets, OverlapKind kind, double threshold, double cutoff);

// Enumerates every distinct score cutoff, re-matching all frames from scratch
// each time, and interpolates max over cutoffs whose recall reaches k/n.
double brute_force_metric(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind,
                          Similarity similarity);

// Every metric of evaluate() via brute_force_metric. Curves are left empty.
MetricReport reference_report(std::span<const Frame> frames, const EvaluationPlan& plan);

// Central finite difference of f at x along coordinate i.
double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                          std::size_t i, double h);

}  // namespace adseval::oracle
