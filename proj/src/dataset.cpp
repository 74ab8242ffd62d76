// SPDX-License-Identifier: Apache-2.0
#include "adseval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "adseval/errors.hpp"

namespace fs = std::filesystem;

namespace adseval {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::byte> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [](char c) { return static_cast<std::byte>(c); });
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_binary_file(const fs::path& path, const std::vector<std::byte>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> list_frame_ids(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != extension) continue;
    ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::map<std::string, std::vector<ObjectLabel>> load_label_dir(const fs::path& dir, bool expect_scores) {
  std::map<std::string, std::vector<ObjectLabel>> out;
  for (const auto& id : list_frame_ids(dir, ".txt")) {
    const fs::path file = dir / (id + ".txt");
    try {
      out.emplace(id, parse_label_file(read_text_file(file), expect_scores));
    } catch (const InputError& e) {
      throw InputError(file.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<Frame> align_frames(const std::map<std::string, std::vector<ObjectLabel>>& gts,
                                const std::map<std::string, std::vector<ObjectLabel>>& preds) {
  for (const auto& [id, _] : preds) {
    if (!gts.contains(id)) throw AlignmentError("prediction frame '" + id + "' has no ground truth");
  }
  std::vector<Frame> frames;
  frames.reserve(gts.size());
  for (const auto& [id, labels] : gts) {
    Frame f{id, labels, {}};
    if (auto it = preds.find(id); it != preds.end()) f.dets = it->second;
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<Frame> load_frames(const fs::path& gt_dir, const fs::path& pred_dir) {
  return align_frames(load_label_dir(gt_dir, false), load_label_dir(pred_dir, true));
}

}  // namespace adseval
