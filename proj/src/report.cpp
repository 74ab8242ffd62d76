// SPDX-License-Identifier: Apache-2.0
#include "adseval/report.hpp"

#include <cstdio>
#include <json.hpp>

#include "adseval/dataset.hpp"
#include "adseval/kitti_io.hpp"

namespace adseval {
namespace {

std::string cell(const std::map<std::string, SubsetReport>& subsets, const std::string& subset, Metric m) {
  auto it = subsets.find(subset);
  if (it == subsets.end()) return "";
  auto mt = it->second.metrics.find(m);
  char buf[32];
  if (mt == it->second.metrics.end()) {
    std::snprintf(buf, sizeof(buf), "%6s", "n/a");
  } else {
    std::snprintf(buf, sizeof(buf), "%6.2f", mt->second.value);
  }
  return buf;
}

std::string row(const std::string& label, const std::vector<std::string>& cells) {
  char head[32];
  std::snprintf(head, sizeof(head), "%-14s", label.c_str());
  std::string out = head;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? " " : "") + cells[i];
  return out + "\n";
}

bool has_subset(const std::map<std::string, SubsetReport>& subsets, const char* name) {
  return subsets.find(name) != subsets.end();
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["recall_points"] = report.recall_points;
  j["classes"] = nlohmann::json::object();
  for (const auto& [cls, subsets] : report.classes) {
    nlohmann::json jc = nlohmann::json::object();
    for (const auto& [name, sub] : subsets) {
      nlohmann::json js;
      js["num_gt"] = sub.num_gt;
      js["metrics"] = nlohmann::json::object();
      for (const auto& [metric, curve] : sub.metrics) {
        js["metrics"][std::string(to_string(metric))] = {
            {"value", curve.value}, {"recall", curve.recall}, {"curve", curve.interpolated}};
      }
      jc[name] = std::move(js);
    }
    j["classes"][cls] = std::move(jc);
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricReport& report) {
  std::string out = "class,subset,metric,value\n";
  for (const auto& [cls, subsets] : report.classes) {
    for (const auto& [name, sub] : subsets) {
      for (const auto& [metric, curve] : sub.metrics) {
        out += cls + "," + name + "," + std::string(to_string(metric)) + "," + format_double(curve.value) + "\n";
      }
    }
  }
  return out;
}

std::string curve_to_csv(const Curve& curve) {
  std::string out = "recall,value\n";
  for (std::size_t i = 0; i < curve.recall.size(); ++i) {
    out += format_double(curve.recall[i]) + "," + format_double(curve.interpolated[i]) + "\n";
  }
  return out;
}

std::string format_table(const MetricReport& report) {
  std::string out;
  for (const auto& [cls, subsets] : report.classes) {
    std::vector<std::string> cols;
    std::vector<std::string> header;
    for (const char* d : {"Easy", "Moderate", "Hard"}) {
      if (!has_subset(subsets, d)) continue;
      cols.push_back(d);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%6s", std::string(d) == "Moderate" ? "Mod." : d);
      header.push_back(buf);
    }
    if (!cols.empty()) {
      out += row(cls, header);
      for (Metric m : kAllMetrics) {
        std::vector<std::string> cells;
        for (const auto& c : cols) cells.push_back(cell(subsets, c, m));
        out += row(std::string(to_string(m)), cells);
      }
    }
    if (has_subset(subsets, "FullyVisible") || has_subset(subsets, "Occluded")) {
      out += row(cls + " visibility", {" Full.", " Occl."});
      for (Metric m : {Metric::AP_3D, Metric::ADS}) {
        out += row(std::string(to_string(m)), {cell(subsets, "FullyVisible", m), cell(subsets, "Occluded", m)});
      }
    }
    out += "\n";
  }
  return out;
}

void write_report_files(const MetricReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "curves");
  write_text_file(out_dir / "report.json", report_to_json(report));
  write_text_file(out_dir / "metrics.csv", report_to_csv(report));
  for (const auto& [cls, subsets] : report.classes) {
    for (const auto& [name, sub] : subsets) {
      for (const auto& [metric, curve] : sub.metrics) {
        write_text_file(out_dir / "curves" / (cls + "_" + name + "_" + std::string(to_string(metric)) + ".csv"),
                        curve_to_csv(curve));
      }
    }
  }
}

}  // namespace adseval
