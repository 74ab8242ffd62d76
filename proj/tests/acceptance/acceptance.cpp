// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "adseval/angles.hpp"
#include "adseval/cli.hpp"
#include "adseval/dataset.hpp"
#include "adseval/errors.hpp"
#include "adseval/eval.hpp"
#include "adseval/geom3d.hpp"
#include "adseval/mono_decode.hpp"
#include "adseval/shape_labels.hpp"
#include "adseval/testkit/gradients.hpp"
#include "adseval/testkit/oracles.hpp"
#include "adseval/testkit/synth.hpp"

namespace fs = std::filesystem;
using namespace adseval;

namespace {

const fs::path kData = ADSEVAL_DATA_DIR;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string num(double v, const char* fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "adseval");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

double metric_of(const nlohmann::json& report, const char* cls, const char* subset, const char* metric) {
  return report.at("classes").at(cls).at(subset).at("metrics").at(metric).at("value").get<double>();
}

Outcome attack_direction() {
  const fs::path out = fs::temp_directory_path() / "adseval_acceptance_attack";
  fs::remove_all(out);
  const int code = run_cli({"sample-attack", (kData / "attack/gt").string(), (kData / "attack/pred").string(),
                            "--classes", "Car", "--copies", "3", "--offsets=-4,4,8", "--scale", "0.5", "--out",
                            out.string()});
  if (code != 0) return {false, "sample-attack exited with " + std::to_string(code)};
  const auto before = nlohmann::json::parse(read_text_file(out / "before" / "report.json"));
  const auto after = nlohmann::json::parse(read_text_file(out / "after" / "report.json"));
  fs::remove_all(out);
  const double ap0 = metric_of(before, "Car", "Moderate", "AP_3D"), ap1 = metric_of(after, "Car", "Moderate", "AP_3D");
  const double ads0 = metric_of(before, "Car", "Moderate", "ADS"), ads1 = metric_of(after, "Car", "Moderate", "ADS");
  const double d_ap = ap1 - ap0, d_ads = ads1 - ads0;
  const bool ok = d_ap >= 5.0 && d_ads <= -2.0;
  return {ok, "AP_3D Mod " + num(ap0, "%.2f") + " -> " + num(ap1, "%.2f") + " (delta " + num(d_ap, "%+.2f") +
                  ", need >= +5), ADS Mod " + num(ads0, "%.2f") + " -> " + num(ads1, "%.2f") + " (delta " +
                  num(d_ads, "%+.2f") + ", need <= -2)"};
}

Outcome iou_oracle() {
  constexpr int kPairs = 1000;
  constexpr std::size_t kSamples = 1000000;
  synth::Rng rng(20240);
  std::vector<std::pair<Box3D, Box3D>> pairs;
  for (int i = 0; i < kPairs; ++i) {
    const Box3D a = synth::random_box(rng, 1.5);
    pairs.emplace_back(a, synth::random_box(rng, 1.5));
  }
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<double>> parts;
  for (unsigned w = 0; w < workers; ++w) {
    parts.push_back(std::async(std::launch::async, [&, w] {
      double worst = 0.0;
      for (std::size_t i = w; i < pairs.size(); i += workers) {
        const auto& [a, b] = pairs[i];
        worst = std::max(worst, std::fabs(iou_bev(a, b) - oracle::mc_iou_bev(a, b, kSamples, 2 * i + 1)));
        worst = std::max(worst, std::fabs(iou_3d(a, b) - oracle::mc_iou_3d(a, b, kSamples, 2 * i + 2)));
      }
      return worst;
    }));
  }
  double worst = 0.0;
  for (auto& p : parts) worst = std::max(worst, p.get());
  bool identical = true;
  for (const auto& [a, b] : pairs) {
    identical &= iou_bev(a, a) == 1.0 && iou_3d(a, a) == 1.0 && iou_bev(b, b) == 1.0 && iou_3d(b, b) == 1.0;
  }
  return {worst <= 5e-3 && identical, "max |diff| " + num(worst) + " over " + std::to_string(kPairs) +
                                          " pairs (tol 5e-3); identical boxes exactly 1.0: " +
                                          (identical ? "yes" : "no")};
}

Outcome ap_oracle() {
  synth::Rng rng(4242);
  double worst = 0.0;
  int scenes = 0, attempts = 0;
  while (scenes < 100 && attempts < 1000) {
    ++attempts;
    synth::SceneOptions opt;
    opt.max_objects = 20;
    opt.quantized_scores = attempts % 2 == 0;
    const auto frames = synth::random_scene(rng, opt);
    const EvalConfig cfg = EvalConfig::for_class("Car", Difficulty::Hard);
    if (pool_detections(frames, cfg, OverlapKind::Image2D).num_gt == 0) continue;
    for (auto kind : {OverlapKind::Image2D, OverlapKind::Bev, OverlapKind::Box3D}) {
      worst = std::max(worst, std::fabs(average_precision(frames, cfg, kind).value -
                                        oracle::brute_force_metric(frames, cfg, kind, Similarity::Precision)));
    }
    worst = std::max(worst, std::fabs(ads(frames, cfg).value -
                                      oracle::brute_force_metric(frames, cfg, OverlapKind::Image2D, Similarity::Depth)));
    ++scenes;
  }
  return {scenes == 100 && worst <= 1e-9,
          "max |diff| " + num(worst) + " over " + std::to_string(scenes) + " scenes (tol 1e-9)"};
}

Outcome ads_bound() {
  std::vector<std::vector<Frame>> fixtures;
  fixtures.push_back(load_frames(kData / "attack/gt", kData / "attack/pred"));
  fixtures.push_back(load_frames(kData / "perfect/gt", kData / "perfect/pred"));
  const std::vector<double> offsets = {-4.0, 4.0, 8.0};
  fixtures.push_back(result_sampling(fixtures[0], 3, offsets, 0.5));
  synth::Rng rng(77);
  for (int i = 0; i < 200; ++i) fixtures.push_back(synth::random_scene(rng));
  std::size_t cells = 0, violations = 0;
  for (const auto& frames : fixtures) {
    const auto report = evaluate(frames, EvaluationPlan{});
    for (const auto& [cls, subsets] : report.classes) {
      for (const auto& [name, sub] : subsets) {
        if (sub.metrics.empty()) continue;
        ++cells;
        violations += !(sub.metrics.at(Metric::ADS).value <= sub.metrics.at(Metric::AP_2D).value);
      }
    }
  }
  return {violations == 0 && cells > 0, std::to_string(violations) + " violations over " + std::to_string(cells) +
                                            " (class, subset) cells in " + std::to_string(fixtures.size()) +
                                            " fixtures"};
}

Outcome decode_round_trip() {
  synth::Rng rng(5);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  double worst = 0.0;
  int n = 0;
  const char* classes[] = {"Car", "Pedestrian", "Cyclist"};
  for (; n < 1000; ++n) {
    const char* cls = classes[n % 3];
    const Box3D box = synth::random_visible_box(rng, calib, 5.0, 80.0, config.class_mean_dims.at(cls));
    const Box3D got = assemble_box(synth::encode_observation(box, cls, calib, config), calib, config);
    const double diffs[] = {got.location.x - box.location.x, got.location.y - box.location.y,
                            got.location.z - box.location.z, got.dims.h - box.dims.h, got.dims.w - box.dims.w,
                            got.dims.l - box.dims.l, angle_diff(got.yaw, box.yaw)};
    for (double d : diffs) worst = std::max(worst, std::fabs(d));
  }
  return {worst <= 1e-6, "max |diff| " + num(worst) + " over " + std::to_string(n) + " boxes, 7 parameters (tol 1e-6)"};
}

Outcome loss_gradients() {
  double worst = 0.0;
  std::string per;
  for (auto kind : oracle::kAllLosses) {
    const auto r = oracle::check_gradients(kind, 100, 31);
    worst = std::max(worst, r.max_rel_error);
    per += std::string(per.empty() ? "" : ", ") + std::string(oracle::to_string(kind)) + " " + num(r.max_rel_error);
  }
  return {worst <= 1e-4, "max relative error " + num(worst) + " (tol 1e-4): " + per};
}

std::pair<int, int> cell_of(Vec2 uv, const Box2D& roi, int s) {
  const double fx = (uv.x - roi.left) / (roi.right - roi.left);
  const double fy = (uv.y - roi.top) / (roi.bottom - roi.top);
  if (fx < 0 || fx > 1 || fy < 0 || fy > 1) return {-1, -1};
  return {std::min(s - 1, int(fy * s)), std::min(s - 1, int(fx * s))};
}

std::map<fs::path, std::string> tree(const fs::path& dir) {
  std::map<fs::path, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir)] = read_text_file(e.path());
  }
  return files;
}

Outcome mask_oracle() {
  synth::Rng rng(8);
  const auto calib = synth::kitti_calib();
  std::size_t contested = 0, mismatches = 0;
  for (int scene = 0; scene < 100; ++scene) {
    std::vector<Box3D> boxes;
    const int n = 1 + scene % 4;
    for (int k = 0; k < n; ++k) boxes.push_back(synth::random_visible_box(rng, calib, 6.0, 30.0, {1.5, 1.6, 3.9}));
    const auto cloud = synth::scene_points(rng, boxes, 300, 1500);
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      MaskRequest req;
      req.box = boxes[k];
      req.roi = synth::label_from_box(boxes[k], calib, "Car").bbox;
      req.seed = 1234;
      req.frame_key = frame_key(std::to_string(scene));
      req.object_key = k;
      MaskTrace trace;
      const MaskGrid g = generate_mask(req, cloud, calib, &trace);
      for (std::size_t cell = 0; cell < g.cells.size(); ++cell) {
        if (trace.point_count[cell] == 0) {
          mismatches += g.cells[cell] != kMaskUnknown;
          continue;
        }
        ++contested;
        const Vec3 p = cloud[trace.selected_point[cell]];
        const auto [r, c] = cell_of(project_to_image(p, calib), req.roi, req.grid_size);
        mismatches += static_cast<std::size_t>(r * req.grid_size + c) != cell;
        mismatches += g.cells[cell] != (oracle::halfspace_contains(boxes[k], p) ? kMaskForeground : kMaskBackground);
      }
    }
  }
  const auto base = fs::temp_directory_path() / "adseval_acceptance_masks";
  fs::remove_all(base);
  const auto labels = (kData / "masks/label_2").string(), calib_dir = (kData / "masks/calib").string(),
             velo = (kData / "masks/velodyne").string();
  bool identical = true;
  std::map<fs::path, std::string> reference;
  int variant = 0;
  for (const char* jobs : {"1", "1", "4"}) {
    const auto dir = base / std::to_string(variant++);
    if (run_cli({"maskgen", labels, calib_dir, velo, "--seed", "3", "--jobs", jobs, "--out", dir.string()}) != 0) {
      identical = false;
      break;
    }
    auto files = tree(dir);
    if (reference.empty()) {
      reference = std::move(files);
      identical &= !reference.empty();
    } else {
      identical &= files == reference;
    }
  }
  fs::remove_all(base);
  return {mismatches == 0 && contested > 0 && identical,
          std::to_string(mismatches) + " mismatches over " + std::to_string(contested) +
              " occupied cells in 100 scenes; maskgen output byte-identical across runs and --jobs: " +
              (identical ? "yes" : "no")};
}

Outcome perfect_input() {
  std::string table;
  const int code = run_cli({"evaluate", (kData / "perfect/gt").string(), (kData / "perfect/pred").string()}, &table);
  if (code != 0) return {false, "evaluate exited with " + std::to_string(code)};
  const auto report = evaluate(load_frames(kData / "perfect/gt", kData / "perfect/pred"), EvaluationPlan{});
  std::size_t cells = 0, off = 0;
  for (const auto& [cls, subsets] : report.classes) {
    for (const auto& [name, sub] : subsets) {
      for (const auto& [m, c] : sub.metrics) {
        ++cells;
        off += c.value != 100.0;
      }
    }
  }
  return {off == 0 && cells > 0, std::to_string(cells - off) + "/" + std::to_string(cells) + " metric cells at 100.0"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_s;
};

}  // namespace

int main() {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {"attack-direction", attack_direction, 30.0},  {"iou-oracle", iou_oracle, 120.0},
      {"ap-ads-oracle", ap_oracle, 60.0},            {"ads-bound", ads_bound, inf},
      {"decode-round-trip", decode_round_trip, 5.0}, {"loss-gradients", loss_gradients, 10.0},
      {"mask-oracle", mask_oracle, inf},             {"perfect-input", perfect_input, inf},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = num(secs, "%.2f") + " s";
    if (std::isfinite(c.budget_s)) {
      timing += " of " + num(c.budget_s, "%.0f") + " s";
      if (secs > c.budget_s) {
        o.ok = false;
        timing += ", over budget";
      }
    }
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << timing << "]" << std::endl;
    failed += !o.ok;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
