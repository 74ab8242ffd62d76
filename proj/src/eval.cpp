// SPDX-License-Identifier: Apache-2.0
#include "adseval/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "adseval/angles.hpp"
#include "adseval/errors.hpp"
#include "adseval/geom3d.hpp"

namespace adseval {

DifficultyLimits limits_for(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return {40.0, 0, 0.15};
    case Difficulty::Moderate: return {25.0, 1, 0.30};
    case Difficulty::Hard: return {25.0, 2, 0.50};
  }
  throw std::invalid_argument("unknown difficulty");
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Moderate: return "Moderate";
    case Difficulty::Hard: return "Hard";
  }
  return "?";
}

std::optional<Difficulty> parse_difficulty(std::string_view name) {
  for (auto d : {Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard}) {
    const auto canonical = to_string(d);
    if (canonical.size() == name.size() &&
        std::equal(name.begin(), name.end(), canonical.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        })) {
      return d;
    }
  }
  return std::nullopt;
}

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::FullyVisible: return "FullyVisible";
    case Visibility::Occluded: return "Occluded";
    case Visibility::Ignore: return "Ignore";
  }
  return "?";
}

std::string_view to_string(OverlapKind k) {
  switch (k) {
    case OverlapKind::Image2D: return "2d";
    case OverlapKind::Bev: return "bev";
    case OverlapKind::Box3D: return "3d";
  }
  return "?";
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::AP_2D: return "AP_2D";
    case Metric::AP_BEV: return "AP_BEV";
    case Metric::AP_3D: return "AP_3D";
    case Metric::AOS: return "AOS";
    case Metric::ADS: return "ADS";
  }
  return "?";
}

ClassThresholds default_thresholds(std::string_view class_name) {
  if (class_name == "Car") return {0.7, 0.7, 0.7};
  return {0.5, 0.5, 0.5};
}

std::vector<std::string> default_neighbor_classes(std::string_view class_name) {
  if (class_name == "Car") return {"Van"};
  if (class_name == "Pedestrian") return {"Person_sitting"};
  return {};
}

EvalConfig EvalConfig::for_class(std::string_view class_name, Difficulty difficulty) {
  EvalConfig c;
  c.class_name = std::string(class_name);
  c.thresholds = default_thresholds(class_name);
  c.difficulty = difficulty;
  c.neighbor_classes = default_neighbor_classes(class_name);
  return c;
}

void EvalConfig::validate() const {
  for (double t : {thresholds.iou_3d, thresholds.iou_bev, thresholds.iou_2d}) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("IoU thresholds must lie in (0, 1]");
  }
  if (recall_points < 1) throw std::invalid_argument("recall_points must be >= 1");
}

Visibility visibility_of(const ObjectLabel& gt) {
  if (gt.occlusion == 3) return Visibility::Ignore;
  if (gt.bbox.height() < limits_for(Difficulty::Moderate).min_height_px) return Visibility::Ignore;
  if (gt.occlusion == 0 && gt.truncation == 0.0) return Visibility::FullyVisible;
  return Visibility::Occluded;
}

std::vector<Visibility> occlusion_split(std::span<const ObjectLabel> gts) {
  std::vector<Visibility> out;
  out.reserve(gts.size());
  for (const auto& g : gts) out.push_back(visibility_of(g));
  return out;
}

std::vector<GtStatus> difficulty_filter(std::span<const ObjectLabel> gts, const EvalConfig& config) {
  const DifficultyLimits lim = limits_for(config.visibility ? Difficulty::Moderate : config.difficulty);
  std::vector<GtStatus> out;
  out.reserve(gts.size());
  for (const auto& g : gts) {
    if (g.is_dont_care() || std::find(config.neighbor_classes.begin(), config.neighbor_classes.end(),
                                      g.class_name) != config.neighbor_classes.end()) {
      out.push_back(GtStatus::Ignore);
      continue;
    }
    if (g.class_name != config.class_name) {
      out.push_back(GtStatus::Exclude);
      continue;
    }
    bool keep = false;
    if (config.visibility) {
      keep = visibility_of(g) == *config.visibility;
    } else {
      keep = g.bbox.height() >= lim.min_height_px && g.occlusion <= lim.max_occlusion &&
             g.truncation <= lim.max_truncation;
    }
    out.push_back(keep ? GtStatus::Evaluate : GtStatus::Ignore);
  }
  return out;
}

double overlap(OverlapKind kind, const ObjectLabel& det, const ObjectLabel& gt) {
  if (gt.is_dont_care()) {
    const Box2D& a = det.bbox;
    const Box2D& b = gt.bbox;
    if (a.degenerate()) return 0.0;
    const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
    const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih / a.area();
  }
  switch (kind) {
    case OverlapKind::Image2D: return iou_2d(det.bbox, gt.bbox);
    case OverlapKind::Bev: return iou_bev(box_from_label(det), box_from_label(gt));
    case OverlapKind::Box3D: return iou_3d(box_from_label(det), box_from_label(gt));
  }
  return 0.0;
}

double threshold_for(const EvalConfig& config, OverlapKind kind) {
  switch (kind) {
    case OverlapKind::Image2D: return config.thresholds.iou_2d;
    case OverlapKind::Bev: return config.thresholds.iou_bev;
    case OverlapKind::Box3D: return config.thresholds.iou_3d;
  }
  return 1.0;
}

MatchResult match_frame(std::span<const ObjectLabel> gts, std::span<const GtStatus> status,
                        std::span<const ObjectLabel> dets, OverlapKind kind, double threshold,
                        double score_cutoff) {
  if (status.size() != gts.size()) throw std::invalid_argument("match_frame: status/gt size mismatch");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!dets[i].score) throw std::invalid_argument("match_frame: detection without score");
    if (*dets[i].score >= score_cutoff) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *dets[a].score > *dets[b].score; });

  MatchResult out;
  out.gt_match.assign(gts.size(), -1);
  for (std::size_t di : order) {
    const ObjectLabel& det = dets[di];
    int best = -1;
    double best_overlap = 0.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (status[gi] != GtStatus::Evaluate || out.gt_match[gi] >= 0) continue;
      const double ov = overlap(kind, det, gts[gi]);
      if (ov >= threshold && (best < 0 || ov > best_overlap)) {
        best = static_cast<int>(gi);
        best_overlap = ov;
      }
    }
    DetOutcome o;
    o.det_index = di;
    if (best >= 0) {
      const ObjectLabel& gt = gts[best];
      o.state = DetState::TruePositive;
      o.gt_index = best;
      o.overlap = best_overlap;
      o.depth_error = det.location.z - gt.location.z;
      o.orientation_error = angle_diff(gt.alpha, det.alpha);
      out.gt_match[best] = static_cast<int>(di);
    } else {
      o.state = DetState::FalsePositive;
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (status[gi] != GtStatus::Ignore) continue;
        const double ov = overlap(kind, det, gts[gi]);
        if (ov >= threshold) {
          o.state = DetState::Ignored;
          o.gt_index = static_cast<int>(gi);
          o.overlap = ov;
          break;
        }
      }
    }
    out.dets.push_back(o);
  }
  return out;
}

PooledDetections pool_detections(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind) {
  config.validate();
  const double threshold = threshold_for(config, kind);

  // Canonical frame order makes the reduction independent of input order.
  std::vector<std::size_t> frame_order(frames.size());
  std::iota(frame_order.begin(), frame_order.end(), 0);
  std::sort(frame_order.begin(), frame_order.end(),
            [&](std::size_t a, std::size_t b) { return frames[a].id < frames[b].id; });

  struct Keyed {
    ScoredOutcome outcome;
    std::size_t frame_rank;
    std::size_t det_index;
  };
  std::vector<Keyed> keyed;
  PooledDetections pooled;
  for (std::size_t rank = 0; rank < frame_order.size(); ++rank) {
    const Frame& f = frames[frame_order[rank]];
    const auto status = difficulty_filter(f.gts, config);
    pooled.num_gt += static_cast<std::size_t>(std::count(status.begin(), status.end(), GtStatus::Evaluate));

    std::vector<ObjectLabel> dets;
    std::vector<std::size_t> original;
    for (std::size_t i = 0; i < f.dets.size(); ++i) {
      if (f.dets[i].class_name != config.class_name) continue;
      dets.push_back(f.dets[i]);
      original.push_back(i);
    }
    const MatchResult m = match_frame(f.gts, status, dets, kind, threshold);
    for (const auto& o : m.dets) {
      if (o.state == DetState::Ignored) continue;
      keyed.push_back({{*dets[o.det_index].score, o.state == DetState::TruePositive, o.depth_error,
                        o.orientation_error},
                       rank, original[o.det_index]});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::make_tuple(-a.outcome.score, a.frame_rank, a.det_index) <
           std::make_tuple(-b.outcome.score, b.frame_rank, b.det_index);
  });
  pooled.outcomes.reserve(keyed.size());
  for (const auto& k : keyed) pooled.outcomes.push_back(k.outcome);
  return pooled;
}

std::vector<double> score_thresholds(std::span<const double> tp_scores_desc, std::size_t num_gt, int recall_points) {
  if (num_gt == 0) throw UndefinedRecallError();
  if (recall_points < 1) throw std::invalid_argument("recall_points must be >= 1");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(recall_points);
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t rank = (k * num_gt + n - 1) / n;  // ceil(k * num_gt / n)
    if (rank > tp_scores_desc.size()) break;
    out.push_back(tp_scores_desc[rank - 1]);
  }
  return out;
}

double depth_similarity(double delta_d) { return std::exp(-std::fabs(delta_d)); }

double orientation_similarity(double delta_theta) { return (1.0 + std::cos(delta_theta)) / 2.0; }

Curve accumulate_curve(const PooledDetections& pooled, int recall_points, Similarity similarity) {
  if (pooled.num_gt == 0) throw UndefinedRecallError();
  const auto& outs = pooled.outcomes;
  std::vector<double> tp_scores;
  for (const auto& o : outs)
    if (o.true_positive) tp_scores.push_back(o.score);
  const auto thresholds = score_thresholds(tp_scores, pooled.num_gt, recall_points);

  // Prefix sums in canonical order.
  std::vector<std::size_t> tp_prefix(outs.size() + 1, 0);
  std::vector<double> sim_prefix(outs.size() + 1, 0.0);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    tp_prefix[i + 1] = tp_prefix[i] + (outs[i].true_positive ? 1 : 0);
    double s = 0.0;
    if (outs[i].true_positive) {
      switch (similarity) {
        case Similarity::Precision: s = 1.0; break;
        case Similarity::Orientation: s = orientation_similarity(outs[i].orientation_error); break;
        case Similarity::Depth: s = depth_similarity(outs[i].depth_error); break;
      }
    }
    sim_prefix[i + 1] = sim_prefix[i] + s;
  }

  const auto n = static_cast<std::size_t>(recall_points);
  Curve c;
  c.recall.resize(n);
  c.raw.assign(n, 0.0);
  c.interpolated.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) c.recall[k] = static_cast<double>(k + 1) / static_cast<double>(n);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    // Number of detections with score >= threshold.
    const auto it = std::partition_point(outs.begin(), outs.end(),
                                         [&](const ScoredOutcome& o) { return o.score >= thresholds[k]; });
    const auto count = static_cast<std::size_t>(it - outs.begin());
    c.raw[k] = sim_prefix[count] / static_cast<double>(count);
  }
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    running = std::max(running, c.raw[k]);
    c.interpolated[k] = running;
  }
  double sum = 0.0;
  for (double v : c.interpolated) sum += v;
  c.value = 100.0 * sum / static_cast<double>(n);
  return c;
}

Curve average_precision(std::span<const Frame> frames, const EvalConfig& config, OverlapKind kind) {
  return accumulate_curve(pool_detections(frames, config, kind), config.recall_points, Similarity::Precision);
}

Curve ads(std::span<const Frame> frames, const EvalConfig& config) {
  return accumulate_curve(pool_detections(frames, config, OverlapKind::Image2D), config.recall_points,
                          Similarity::Depth);
}

Curve aos(std::span<const Frame> frames, const EvalConfig& config) {
  return accumulate_curve(pool_detections(frames, config, OverlapKind::Image2D), config.recall_points,
                          Similarity::Orientation);
}

std::vector<ObjectLabel> result_sampling(std::span<const ObjectLabel> dets, std::size_t n_copies,
                                         std::span<const double> depth_offsets, double score_scale) {
  if (n_copies != depth_offsets.size()) throw std::invalid_argument("result_sampling: need one offset per copy");
  if (!(score_scale > 0.0 && score_scale < 1.0)) throw std::invalid_argument("result_sampling: scale must be in (0, 1)");
  std::vector<ObjectLabel> out(dets.begin(), dets.end());
  for (const auto& d : dets) {
    if (!d.score) throw std::invalid_argument("result_sampling: detection without score");
    double factor = 1.0;
    for (std::size_t k = 0; k < n_copies; ++k) {
      factor *= score_scale;
      const double z = d.location.z + depth_offsets[k];
      if (!(z > 0.0) || !(d.location.z > 0.0)) continue;
      const double ray = z / d.location.z;
      ObjectLabel clone = d;
      clone.location = {d.location.x * ray, d.location.y * ray, z};
      clone.score = *d.score * factor;
      out.push_back(std::move(clone));
    }
  }
  return out;
}

std::vector<Frame> result_sampling(std::span<const Frame> frames, std::size_t n_copies,
                                   std::span<const double> depth_offsets, double score_scale) {
  std::vector<Frame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back({f.id, f.gts, result_sampling(f.dets, n_copies, depth_offsets, score_scale)});
  return out;
}

std::vector<EvalConfig> EvaluationPlan::configs() const {
  std::vector<EvalConfig> out;
  for (const auto& cls : classes) {
    auto base = EvalConfig::for_class(cls);
    base.recall_points = recall_points;
    if (auto it = threshold_overrides.find(cls); it != threshold_overrides.end()) base.thresholds = it->second;
    for (auto d : difficulties) {
      EvalConfig c = base;
      c.difficulty = d;
      out.push_back(c);
    }
    if (occlusion_split) {
      for (auto v : {Visibility::FullyVisible, Visibility::Occluded}) {
        EvalConfig c = base;
        c.difficulty = Difficulty::Moderate;
        c.visibility = v;
        out.push_back(c);
      }
    }
  }
  return out;
}

namespace {

SubsetReport evaluate_subset(std::span<const Frame> frames, const EvalConfig& config) {
  SubsetReport r;
  const PooledDetections p2d = pool_detections(frames, config, OverlapKind::Image2D);
  r.num_gt = p2d.num_gt;
  if (r.num_gt == 0) return r;
  const int n = config.recall_points;
  r.metrics[Metric::AP_2D] = accumulate_curve(p2d, n, Similarity::Precision);
  r.metrics[Metric::AOS] = accumulate_curve(p2d, n, Similarity::Orientation);
  r.metrics[Metric::ADS] = accumulate_curve(p2d, n, Similarity::Depth);
  r.metrics[Metric::AP_BEV] = accumulate_curve(pool_detections(frames, config, OverlapKind::Bev), n, Similarity::Precision);
  r.metrics[Metric::AP_3D] = accumulate_curve(pool_detections(frames, config, OverlapKind::Box3D), n, Similarity::Precision);
  return r;
}

std::string subset_name(const EvalConfig& c) {
  return std::string(c.visibility ? to_string(*c.visibility) : to_string(c.difficulty));
}

}  // namespace

MetricReport evaluate(std::span<const Frame> frames, const EvaluationPlan& plan) {
  const auto configs = plan.configs();
  for (const auto& c : configs) c.validate();

  std::vector<SubsetReport> results(configs.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, plan.jobs));
  if (jobs == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) results[i] = evaluate_subset(frames, configs[i]);
  } else {
    for (std::size_t start = 0; start < configs.size(); start += jobs) {
      std::vector<std::future<SubsetReport>> batch;
      for (std::size_t i = start; i < std::min(configs.size(), start + jobs); ++i) {
        batch.push_back(std::async(std::launch::async, [&, i] { return evaluate_subset(frames, configs[i]); }));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
    }
  }

  MetricReport report;
  report.recall_points = plan.recall_points;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    report.classes[configs[i].class_name][subset_name(configs[i])] = std::move(results[i]);
  }
  return report;
}

}  // namespace adseval
