// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adseval/dataset.hpp"
#include "adseval/kitti_io.hpp"

namespace adseval {

enum class Difficulty { Easy, Moderate, Hard };

struct DifficultyLimits {
  double min_height_px;
  int max_occlusion;
  double max_truncation;
};

DifficultyLimits limits_for(Difficulty d);
std::string_view to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view name);

// Visibility buckets used by the occluded / fully-visible breakdown.
enum class Visibility { FullyVisible, Occluded, Ignore };
std::string_view to_string(Visibility v);

struct ClassThresholds {
  double iou_3d = 0.5;
  double iou_bev = 0.5;
  double iou_2d = 0.5;
};

// KITTI conventions: 0.7 for Car, 0.5 otherwise.
ClassThresholds default_thresholds(std::string_view class_name);

// Neighbor classes whose ground truths are ignored rather than missed:
// Car -> Van, Pedestrian -> Person_sitting.
std::vector<std::string> default_neighbor_classes(std::string_view class_name);

struct EvalConfig {
  std::string class_name = "Car";
  ClassThresholds thresholds;
  int recall_points = 40;
  Difficulty difficulty = Difficulty::Moderate;
  std::vector<std::string> neighbor_classes;
  // When set, ground truths are selected by visibility bucket (with the
  // Moderate height limit) instead of by difficulty.
  std::optional<Visibility> visibility;

  static EvalConfig for_class(std::string_view class_name, Difficulty difficulty = Difficulty::Moderate);
  void validate() const;
};

// Exclude: unrelated class, invisible to matching.
enum class GtStatus { Evaluate, Ignore, Exclude };

std::vector<GtStatus> difficulty_filter(std::span<const ObjectLabel> gts, const EvalConfig& config);

// occl 3 or box height < 25 px -> Ignore; occl 0 and trunc 0 -> FullyVisible;
// otherwise Occluded.
Visibility visibility_of(const ObjectLabel& gt);
std::vector<Visibility> occlusion_split(std::span<const ObjectLabel> gts);

enum class OverlapKind { Image2D, Bev, Box3D };
std::string_view to_string(OverlapKind k);

// Overlap of a detection with a ground truth under `kind`. DontCare ground
// truths are compared in the image plane as intersection over detection area.
double overlap(OverlapKind kind, const ObjectLabel& det, const ObjectLabel& gt);

double threshold_for(const EvalConfig& config, OverlapKind kind);

enum class DetState { TruePositive, FalsePositive, Ignored };

struct DetOutcome {
  std::size_t det_index = 0;
  DetState state = DetState::FalsePositive;
  int gt_index = -1;
  double overlap = 0.0;
  double depth_error = 0.0;        // z_det - z_gt, meters (TP only)
  double orientation_error = 0.0;  // alpha_gt - alpha_det wrapped (TP only)
};

struct MatchResult {
  std::vector<DetOutcome> dets;  // in processing order (score desc, index asc)
  std::vector<int> gt_match;     // det index per gt, -1 if unmatched
};

// Greedy matching of detections with score >= score_cutoff in descending
// score order (lower index first on ties). Each detection takes the unmatched
// Evaluate ground truth with the highest overlap >= threshold; failing that
// it is Ignored if it overlaps any Ignore ground truth by >= threshold, and
// a false positive otherwise.
MatchResult match_frame(std::span<const ObjectLabel> gts, std::span<const GtStatus> status,
                        std::span<const ObjectLabel> dets, OverlapKind kind, double threshold,
                        double score_cutoff = -std::numeric_limits<double>::infinity());

// One non-ignored detection pooled across frames.
struct ScoredOutcome {
  double score = 0.0;
  bool true_positive = false;
  double depth_error = 0.0;
  double orientation_error = 0.0;
};

struct PooledDetections {
  std::vector<ScoredOutcome> outcomes;  // sorted by score desc, then frame id, then det index
  std::size_t num_gt = 0;
};

PooledDetections pool_detections(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind);

// Score cutoffs for target recalls k/n, k = 1..n: the score of the
// ceil(k * num_gt / n)-th highest TP. Unreachable recalls are dropped.
std::vector<double> score_thresholds(std::span<const double> tp_scores_desc, std::size_t num_gt, int recall_points);

enum class Similarity { Precision, Orientation, Depth };

double depth_similarity(double delta_d);
double orientation_similarity(double delta_theta);

struct Curve {
  double value = 0.0;               // percent
  std::vector<double> recall;       // k / n, k = 1..n
  std::vector<double> raw;          // value at the threshold for recall k/n, 0 if unreachable
  std::vector<double> interpolated; // max over recall >= k/n
};

// Accumulates a pooled set into an AP-style curve; Precision yields AP,
// Orientation AOS and Depth ADS.
Curve accumulate_curve(const PooledDetections& pooled, int recall_points, Similarity similarity);

Curve average_precision(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind);
Curve ads(std::span<const Frame> frames, const EvalConfig& config);
Curve aos(std::span<const Frame> frames, const EvalConfig& config);

// Appends, for every detection, one clone per depth offset. Clone k (1-based)
// has its location scaled along the viewing ray by (z + offset) / z and its
// score multiplied by score_scale^k; 2D box and angles are unchanged. Clones
// that would land at z <= 0 are skipped.
std::vector<ObjectLabel> result_sampling(std::span<const ObjectLabel> dets, std::size_t n_copies,
                                         std::span<const double> depth_offsets, double score_scale);
std::vector<Frame> result_sampling(std::span<const Frame> frames, std::size_t n_copies,
                                   std::span<const double> depth_offsets, double score_scale);

enum class Metric { AP_2D, AP_BEV, AP_3D, AOS, ADS };
inline constexpr Metric kAllMetrics[] = {Metric::AP_2D, Metric::AP_BEV, Metric::AP_3D, Metric::AOS, Metric::ADS};
std::string_view to_string(Metric m);

struct SubsetReport {
  std::size_t num_gt = 0;
  std::map<Metric, Curve> metrics;  // empty when num_gt == 0
};

// class -> subset ("Easy", "Moderate", "Hard", "FullyVisible", "Occluded").
struct MetricReport {
  int recall_points = 40;
  std::map<std::string, std::map<std::string, SubsetReport>> classes;
};

struct EvaluationPlan {
  std::vector<std::string> classes = {"Car", "Pedestrian", "Cyclist"};
  std::map<std::string, ClassThresholds> threshold_overrides;
  std::vector<Difficulty> difficulties = {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard};
  int recall_points = 40;
  bool occlusion_split = true;
  int jobs = 1;

  std::vector<EvalConfig> configs() const;
};

// All metrics for every configured (class, subset). Output does not depend
// on frame order or on `jobs`.
MetricReport evaluate(std::span<const Frame> frames, const EvaluationPlan& plan);

}  // namespace adseval
