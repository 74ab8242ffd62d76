// SPDX-License-Identifier: Apache-2.0
// Regenerates the synthetic fixtures under data/.
#include <filesystem>
#include <iostream>

#include "adseval/dataset.hpp"
#include "adseval/testkit/synth.hpp"

namespace fs = std::filesystem;
using namespace adseval;

namespace {

void write_labels(const fs::path& dir, const std::string& id, const std::vector<ObjectLabel>& labels) {
  fs::create_directories(dir);
  write_text_file(dir / (id + ".txt"), write_label_file(labels));
}

void attack(const fs::path& root) {
  for (const auto& f : synth::attack_fixture()) {
    write_labels(root / "attack" / "gt", f.id, f.gts);
    write_labels(root / "attack" / "pred", f.id, f.dets);
    std::vector<ObjectLabel> perfect = f.gts;
    for (auto& l : perfect) l.score = 1.0;
    write_labels(root / "perfect" / "gt", f.id, f.gts);
    write_labels(root / "perfect" / "pred", f.id, perfect);
  }
}

void decode(const fs::path& root) {
  synth::Rng rng(11);
  const auto calib = synth::kitti_calib();
  const auto config = DecoderConfig::kitti_defaults();
  std::string rows;
  for (int i = 0; i < 5; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "%06d", i);
    fs::create_directories(root / "decode" / "calib");
    write_text_file(root / "decode" / "calib" / (std::string(id) + ".txt"), write_calib_file(calib));
    std::vector<ObjectLabel> expected;
    // Frame 000004 has no observations.
    const int n = i == 4 ? 0 : 1 + i % 3;
    for (int k = 0; k < n; ++k) {
      const char* cls = k == 1 ? "Pedestrian" : "Car";
      const Box3D box = synth::random_visible_box(rng, calib, 5.0, 60.0, config.class_mean_dims.at(cls));
      const double score = synth::uniform(rng, 0.1, 1.0);
      const ObjectLabel label = synth::label_from_box(box, calib, cls, score);
      const std::array<double, 4> sigmas = {0.5, 0.8, 1.2, 0.3};
      rows += synth::observation_row(id, synth::encode_observation(box, cls, calib, config, sigmas), score, label.bbox);
      expected.push_back(label);
    }
    write_labels(root / "decode" / "expected", id, expected);
  }
  write_text_file(root / "decode" / "observations.txt", rows);
  std::string means;
  for (const auto& [cls, d] : config.class_mean_dims) {
    means += cls + " " + format_double(d.h) + " " + format_double(d.w) + " " + format_double(d.l) + "\n";
  }
  write_text_file(root / "decode" / "means.txt", means);
}

void masks(const fs::path& root) {
  synth::Rng rng(23);
  const auto calib = synth::kitti_calib_with_lidar();
  const auto config = DecoderConfig::kitti_defaults();
  for (int i = 0; i < 4; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "%06d", i);
    std::vector<Box3D> boxes;
    std::vector<ObjectLabel> labels;
    for (int k = 0; k < 3; ++k) {
      boxes.push_back(synth::random_visible_box(rng, calib, 6.0, 30.0, config.class_mean_dims.at("Car")));
      labels.push_back(synth::label_from_box(boxes.back(), calib, "Car"));
    }
    const auto pts = synth::scene_points(rng, boxes, 400, 2000);
    write_labels(root / "masks" / "label_2", id, labels);
    fs::create_directories(root / "masks" / "calib");
    write_text_file(root / "masks" / "calib" / (std::string(id) + ".txt"), write_calib_file(calib));
    fs::create_directories(root / "masks" / "velodyne");
    write_binary_file(root / "masks" / "velodyne" / (std::string(id) + ".bin"), write_velodyne(synth::rect_to_velo(pts)));
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <data_dir>\n";
    return 64;
  }
  const fs::path root = argv[1];
  attack(root);
  decode(root);
  masks(root);
  std::cout << "fixtures written to " << root << '\n';
  return 0;
}
