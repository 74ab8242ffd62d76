// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "adseval/cli.hpp"
#include "adseval/dataset.hpp"
#include "adseval/errors.hpp"
#include "adseval/eval.hpp"
#include "adseval/mono_decode.hpp"
#include "adseval/report.hpp"
#include "adseval/shape_labels.hpp"

namespace fs = std::filesystem;

namespace adseval::cli {
namespace {

// Raised for flag values CLI11 cannot validate on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalFlags {
  std::string gt_dir;
  std::string pred_dir;
  std::vector<std::string> classes = {"Car", "Pedestrian", "Cyclist"};
  std::vector<std::string> difficulties = {"Easy", "Moderate", "Hard"};
  int recall_points = 40;
  std::vector<std::string> iou_3d, iou_bev, iou_2d;
  int jobs = 1;
  std::string out_dir;
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("gt_dir", f.gt_dir, "Ground-truth label directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("pred_dir", f.pred_dir, "Prediction label directory")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--classes", f.classes, "Classes to evaluate")->delimiter(',')->capture_default_str();
  cmd->add_option("--difficulties", f.difficulties, "Difficulty levels")->delimiter(',')->capture_default_str();
  cmd->add_option("--recall-points", f.recall_points, "Recall points")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--iou-3d", f.iou_3d, "Per-class 3D IoU threshold, Class=value")->delimiter(',');
  cmd->add_option("--iou-bev", f.iou_bev, "Per-class BEV IoU threshold, Class=value")->delimiter(',');
  cmd->add_option("--iou-2d", f.iou_2d, "Per-class 2D IoU threshold, Class=value")->delimiter(',');
  cmd->add_option("--jobs", f.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out_dir, "Directory for report.json, metrics.csv and curves");
}

void apply_overrides(const std::vector<std::string>& specs, EvaluationPlan& plan, double ClassThresholds::*field) {
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("expected Class=value, got '" + spec + "'");
    const std::string cls = spec.substr(0, eq);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(spec.substr(eq + 1), &used);
      if (used != spec.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("bad threshold in '" + spec + "'");
    }
    if (!(v > 0.0 && v <= 1.0)) throw UsageError("threshold must be in (0, 1]: '" + spec + "'");
    auto [it, inserted] = plan.threshold_overrides.try_emplace(cls, default_thresholds(cls));
    it->second.*field = v;
  }
}

EvaluationPlan make_plan(const EvalFlags& f) {
  EvaluationPlan plan;
  plan.classes = f.classes;
  plan.recall_points = f.recall_points;
  plan.jobs = f.jobs;
  plan.difficulties.clear();
  for (const auto& name : f.difficulties) {
    auto d = parse_difficulty(name);
    if (!d) throw UsageError("unknown difficulty '" + name + "'");
    plan.difficulties.push_back(*d);
  }
  apply_overrides(f.iou_3d, plan, &ClassThresholds::iou_3d);
  apply_overrides(f.iou_bev, plan, &ClassThresholds::iou_bev);
  apply_overrides(f.iou_2d, plan, &ClassThresholds::iou_2d);
  return plan;
}

int cmd_evaluate(const EvalFlags& f, std::ostream& out) {
  const EvaluationPlan plan = make_plan(f);
  const auto frames = load_frames(f.gt_dir, f.pred_dir);
  const MetricReport report = evaluate(frames, plan);
  out << format_table(report);
  if (!f.out_dir.empty()) write_report_files(report, f.out_dir);
  return kExitOk;
}

std::string fmt(const char* pattern, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

struct AttackFlags {
  EvalFlags eval;
  std::size_t copies = 3;
  std::vector<double> offsets = {-4.0, 4.0, 8.0};
  double scale = 0.5;
  bool offsets_given = false;
};

std::string attack_table(const MetricReport& before, const MetricReport& after, const EvaluationPlan& plan) {
  std::ostringstream os;
  for (const auto& cls : plan.classes) {
    os << cls << '\n';
    os << std::string(20, ' ');
    for (auto d : plan.difficulties) {
      char head[16];
      std::snprintf(head, sizeof(head), " %7s", d == Difficulty::Moderate ? "Mod." : std::string(to_string(d)).c_str());
      os << head;
    }
    os << '\n';
    for (Metric m : kAllMetrics) {
      for (int row = 0; row < 3; ++row) {
        static const char* kRow[] = {"before", "after", "delta"};
        char label[32];
        std::snprintf(label, sizeof(label), "%-7s%-13s", std::string(to_string(m)).c_str(), kRow[row]);
        os << label;
        for (auto d : plan.difficulties) {
          const auto& b = before.classes.at(cls).at(std::string(to_string(d)));
          const auto& a = after.classes.at(cls).at(std::string(to_string(d)));
          if (b.metrics.empty() || a.metrics.empty()) {
            os << "     n/a";
            continue;
          }
          const double vb = b.metrics.at(m).value, va = a.metrics.at(m).value;
          os << (row == 0 ? fmt(" %7.2f", vb) : row == 1 ? fmt(" %7.2f", va) : fmt(" %+7.2f", va - vb));
        }
        os << '\n';
      }
    }
  }
  return os.str();
}

int cmd_sample_attack(AttackFlags f, std::ostream& out) {
  if (!f.offsets_given && f.copies < f.offsets.size()) f.offsets.resize(f.copies);
  if (f.copies != f.offsets.size()) {
    throw UsageError("--copies is " + std::to_string(f.copies) + " but " + std::to_string(f.offsets.size()) +
                     " offsets were given");
  }
  if (!(f.scale > 0.0 && f.scale < 1.0)) throw UsageError("--scale must be in (0, 1)");
  const EvaluationPlan plan = make_plan(f.eval);
  const auto frames = load_frames(f.eval.gt_dir, f.eval.pred_dir);
  const auto attacked = result_sampling(frames, f.copies, f.offsets, f.scale);
  const MetricReport before = evaluate(frames, plan);
  const MetricReport after = evaluate(attacked, plan);
  out << attack_table(before, after, plan);
  if (!f.eval.out_dir.empty()) {
    write_report_files(before, fs::path(f.eval.out_dir) / "before");
    write_report_files(after, fs::path(f.eval.out_dir) / "after");
  }
  return kExitOk;
}

struct MaskFlags {
  std::string label_dir, calib_dir, velo_dir, out_dir;
  int size = 28;
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_maskgen(const MaskFlags& f, std::ostream& out) {
  if (f.size <= 0) throw UsageError("--size must be positive");
  const auto labels = load_label_dir(f.label_dir, false);
  for (const auto& [id, _] : labels) {
    if (!fs::exists(fs::path(f.calib_dir) / (id + ".txt"))) throw AlignmentError("frame '" + id + "' has no calibration file");
    if (!fs::exists(fs::path(f.velo_dir) / (id + ".bin"))) throw AlignmentError("frame '" + id + "' has no velodyne file");
  }
  fs::create_directories(f.out_dir);
  std::vector<std::string> ids;
  for (const auto& [id, _] : labels) ids.push_back(id);

  auto process = [&](const std::string& id) {
    const CalibrationSet calib = parse_calib_file(read_text_file(fs::path(f.calib_dir) / (id + ".txt")));
    const auto cloud = velo_to_rect(parse_velodyne(read_binary_file(fs::path(f.velo_dir) / (id + ".bin"))), calib);
    const auto& objects = labels.at(id);
    std::size_t written = 0;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].is_dont_care()) continue;
      MaskRequest req;
      req.box = box_from_label(objects[i]);
      req.roi = objects[i].bbox;
      req.grid_size = f.size;
      req.seed = f.seed;
      req.frame_key = frame_key(id);
      req.object_key = i;
      const MaskGrid grid = generate_mask(req, cloud, calib);
      write_text_file(fs::path(f.out_dir) / (id + "_" + std::to_string(i) + ".txt"), write_mask(grid));
      ++written;
    }
    return written;
  };

  std::size_t total = 0;
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, f.jobs));
  for (std::size_t start = 0; start < ids.size(); start += jobs) {
    std::vector<std::future<std::size_t>> batch;
    for (std::size_t i = start; i < std::min(ids.size(), start + jobs); ++i) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, process, ids[i]));
    }
    for (auto& fut : batch) total += fut.get();
  }
  out << "wrote " << total << " masks for " << ids.size() << " frames to " << f.out_dir << '\n';
  return kExitOk;
}

struct DecodeFlags {
  std::string observations, calib_dir, means_file, out_dir;
  int num_bins = 4;
  int downsample = 4;
};

std::map<std::string, Dims> parse_means(const std::string& text) {
  std::map<std::string, Dims> means;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string cls;
    if (!(ls >> cls)) continue;
    Dims d;
    std::string extra;
    if (!(ls >> d.h >> d.w >> d.l) || (ls >> extra)) throw ParseError(lineno, "expected 'Class h w l'");
    means[cls] = d;
  }
  return means;
}

struct ObservationRow {
  std::string frame;
  Observation obs;
  double score = 0.0;
  Box2D bbox;
};

std::vector<ObservationRow> parse_observations(const std::string& text, int num_bins) {
  std::vector<ObservationRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const std::size_t expected = 2 + 4 + 8 + 3 + static_cast<std::size_t>(num_bins) * 3 + 1 + 4;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != expected) {
      throw ParseError(lineno, "expected " + std::to_string(expected) + " fields, got " + std::to_string(tok.size()));
    }
    std::vector<double> v;
    for (std::size_t i = 2; i < tok.size(); ++i) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok[i].size() || !std::isfinite(x)) throw ParseError(lineno, "bad number '" + tok[i] + "'");
      v.push_back(x);
    }
    ObservationRow r;
    r.frame = tok[0];
    r.obs.class_name = tok[1];
    std::size_t k = 0;
    r.obs.heatmap_cell = {v[k], v[k + 1]};
    r.obs.offset = {v[k + 2], v[k + 3]};
    k += 4;
    for (int i = 0; i < 4; ++i, k += 2) {
      if (!(v[k + 1] > 0.0)) throw ParseError(lineno, "depth uncertainty must be positive");
      r.obs.depths.push_back({v[k], v[k + 1]});
    }
    r.obs.dim_deltas = {v[k], v[k + 1], v[k + 2]};
    k += 3;
    for (int i = 0; i < num_bins; ++i) r.obs.orientation.logits.push_back(v[k++]);
    for (int i = 0; i < num_bins; ++i, k += 2) r.obs.orientation.sincos.push_back({v[k], v[k + 1]});
    r.score = v[k++];
    r.bbox = {v[k], v[k + 1], v[k + 2], v[k + 3]};
    rows.push_back(std::move(r));
  }
  return rows;
}

int cmd_decode(const DecodeFlags& f, std::ostream& out) {
  DecoderConfig config = DecoderConfig::kitti_defaults();
  config.num_bins = f.num_bins;
  config.downsample = f.downsample;
  if (!f.means_file.empty()) {
    try {
      config.class_mean_dims = parse_means(read_text_file(f.means_file));
    } catch (const InputError& e) {
      throw InputError(f.means_file + ": " + e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::vector<ObservationRow> rows;
  try {
    rows = parse_observations(read_text_file(f.observations), f.num_bins);
  } catch (const InputError& e) {
    throw InputError(f.observations + ": " + e.what());
  }

  std::map<std::string, CalibrationSet> calibs;
  for (const auto& id : list_frame_ids(f.calib_dir, ".txt")) {
    const fs::path p = fs::path(f.calib_dir) / (id + ".txt");
    try {
      calibs.emplace(id, parse_calib_file(read_text_file(p)));
    } catch (const InputError& e) {
      throw InputError(p.string() + ": " + e.what());
    }
  }

  std::map<std::string, std::vector<ObjectLabel>> preds;
  for (const auto& [id, _] : calibs) preds[id];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto it = calibs.find(r.frame);
    if (it == calibs.end()) throw AlignmentError("observation for frame '" + r.frame + "' has no calibration file");
    DecodedObject d;
    try {
      d = decode_object(r.obs, it->second, config);
    } catch (const std::exception& e) {
      throw InputError(f.observations + ": observation " + std::to_string(i + 1) + ": " + e.what());
    }
    ObjectLabel l;
    l.class_name = r.obs.class_name;
    l.alpha = d.alpha;
    l.bbox = r.bbox;
    l.dims = d.box.dims;
    l.location = d.box.location;
    l.rotation_y = d.box.yaw;
    l.score = r.score;
    preds[r.frame].push_back(l);
  }

  fs::create_directories(f.out_dir);
  for (const auto& [id, labels] : preds) write_text_file(fs::path(f.out_dir) / (id + ".txt"), write_label_file(labels));
  out << "decoded " << rows.size() << " objects into " << preds.size() << " frames\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular 3D detection evaluation with Average Depth Similarity"};
  app.name("adseval");
  app.require_subcommand(1);

  EvalFlags eval_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate predictions against KITTI ground truth");
  add_eval_flags(evaluate_cmd, eval_flags);

  AttackFlags attack;
  auto* attack_cmd = app.add_subcommand("sample-attack", "Compare metrics before and after result sampling");
  add_eval_flags(attack_cmd, attack.eval);
  attack_cmd->add_option("--copies", attack.copies, "Clones per detection")->capture_default_str();
  attack_cmd->add_option("--offsets", attack.offsets, "Depth offset per clone, meters (defaults are truncated to --copies)")->delimiter(',')->capture_default_str();
  attack_cmd->add_option("--scale", attack.scale, "Score multiplier per clone, in (0, 1)")->capture_default_str();

  MaskFlags mask;
  auto* mask_cmd = app.add_subcommand("maskgen", "Generate LiDAR instance-mask labels");
  mask_cmd->add_option("label_dir", mask.label_dir)->required()->check(CLI::ExistingDirectory);
  mask_cmd->add_option("calib_dir", mask.calib_dir)->required()->check(CLI::ExistingDirectory);
  mask_cmd->add_option("velo_dir", mask.velo_dir)->required()->check(CLI::ExistingDirectory);
  mask_cmd->add_option("--size", mask.size, "Grid size s")->capture_default_str();
  mask_cmd->add_option("--seed", mask.seed, "Sampling seed")->capture_default_str();
  mask_cmd->add_option("--jobs", mask.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  mask_cmd->add_option("--out", mask.out_dir, "Output directory")->required();

  DecodeFlags dec;
  auto* decode_cmd = app.add_subcommand("decode", "Decode raw observations into KITTI prediction files");
  decode_cmd->add_option("observations", dec.observations)->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("calib_dir", dec.calib_dir)->required()->check(CLI::ExistingDirectory);
  decode_cmd->add_option("--means", dec.means_file, "Class mean dimensions, 'Class h w l' per line")->check(CLI::ExistingFile);
  decode_cmd->add_option("--num-bins", dec.num_bins, "Orientation bins")->capture_default_str()->check(CLI::PositiveNumber);
  decode_cmd->add_option("--downsample", dec.downsample, "Heatmap stride")->capture_default_str()->check(CLI::PositiveNumber);
  decode_cmd->add_option("--out", dec.out_dir, "Output directory")->required();

  SelftestOptions st;
  auto* selftest_cmd = app.add_subcommand("selftest", "Check the metric kernels against independent oracles");
  selftest_cmd->add_option("--seed", st.seed, "Seed for the random cases")->capture_default_str();
  selftest_cmd->add_flag("--quick", st.quick, "Fewer, smaller cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "adseval: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*evaluate_cmd) return cmd_evaluate(eval_flags, out);
    if (*attack_cmd) {
      attack.offsets_given = attack_cmd->count("--offsets") > 0;
      return cmd_sample_attack(attack, out);
    }
    if (*mask_cmd) return cmd_maskgen(mask, out);
    if (*decode_cmd) return cmd_decode(dec, out);
    if (*selftest_cmd) return run_selftest(st, out) ? kExitOk : kExitFailure;
  } catch (const UsageError& e) {
    err << "adseval: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "adseval: " << e.what() << '\n';
    return kExitInput;
  } catch (const AlignmentError& e) {
    err << "adseval: " << e.what() << '\n';
    return kExitAlignment;
  } catch (const std::exception& e) {
    err << "adseval: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace adseval::cli
