// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adseval/kitti_io.hpp"

namespace adseval {

// Ground truth and detections for one image.
struct Frame {
  std::string id;
  std::vector<ObjectLabel> gts;
  std::vector<ObjectLabel> dets;
};

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::byte> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::byte>& bytes);

// Frame ids (file stems) of every `<id><extension>` file in `dir`, sorted.
std::vector<std::string> list_frame_ids(const std::filesystem::path& dir, const std::string& extension);

// Loads every `<frame>.txt` in `dir`. Parse errors are rethrown as
// InputError prefixed with the offending file path.
std::map<std::string, std::vector<ObjectLabel>> load_label_dir(const std::filesystem::path& dir,
                                                                bool expect_scores);

// Joins ground-truth and prediction directories by frame id. A ground-truth
// frame with no prediction file has zero detections; a prediction file with
// no ground truth throws AlignmentError.
std::vector<Frame> load_frames(const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir);

// Same join over already-parsed maps.
std::vector<Frame> align_frames(const std::map<std::string, std::vector<ObjectLabel>>& gts,
                                const std::map<std::string, std::vector<ObjectLabel>>& preds);

}  // namespace adseval
