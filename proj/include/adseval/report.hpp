// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "adseval/eval.hpp"

namespace adseval {

// Structured report: {"recall_points", "classes": {class: {subset: {"num_gt",
// "metrics": {metric: {"value", "recall", "curve"}}}}}}. Keys are sorted and
// numbers use shortest round-trip formatting, so equal reports serialize to
// identical bytes.
std::string report_to_json(const MetricReport& report);

// "class,subset,metric,value" rows.
std::string report_to_csv(const MetricReport& report);

// "recall,value" rows for one interpolated curve.
std::string curve_to_csv(const Curve& curve);

// Aligned per-class table: Easy/Mod/Hard columns by AP_2D, AP_BEV, AP_3D,
// AOS, ADS rows, then the visibility breakdown when present.
std::string format_table(const MetricReport& report);

// Writes report.json, metrics.csv and curves/<class>_<subset>_<metric>.csv.
void write_report_files(const MetricReport& report, const std::filesystem::path& out_dir);

}  // namespace adseval
