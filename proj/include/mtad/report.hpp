/*
 * Copyright 2026 The mtad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mtad/error.hpp"

namespace mtad {

namespace fs = std::filesystem;

#ifndef MTAD_VERSION
#define MTAD_VERSION "0.1.0"
#endif

inline constexpr std::string_view kToolkitVersion = MTAD_VERSION;

// A report cell: a number, or null with a reason code.
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  static MetricValue of(double v) { return {v, {}}; }
  static MetricValue na(std::string_view why) { return {std::nullopt, std::string(why)}; }

  bool has_value() const noexcept { return value.has_value(); }
  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

inline constexpr std::string_view kAllEntities = "all";

struct MetricRow {
  std::string dataset;
  std::string entity_scope;  // entity id, or "all" for the dataset-level row
  std::string detector;
  std::string params;
  MetricValue f1;
  MetricValue f1_adj;
  MetricValue f1_search;
  MetricValue f1_search_adj;
  MetricValue auc;
  MetricValue theta_evt;
  MetricValue theta_search;
  MetricValue salience_raw;
  MetricValue salience_norm;
  MetricValue delay;
  MetricValue train_seconds;
  MetricValue test_seconds;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

inline constexpr std::array<std::string_view, 16> kReportColumns = {
    "dataset", "entity_scope", "detector", "params", "f1", "f1_adj", "f1_search", "f1_search_adj",
    "auc", "theta_evt", "theta_search", "salience_raw", "salience_norm", "delay", "train_seconds",
    "test_seconds"};

inline constexpr std::array<std::string_view, 2> kTimingColumns = {"train_seconds", "test_seconds"};

// Every row of one (dataset, detector) grid: its dataset-level F^1, kept
// for auditing the hyperparameter choice.
struct GridAuditEntry {
  std::string dataset;
  std::string detector;
  std::string params;
  MetricValue f1_search;
  bool selected = false;
};

struct Report {
  nlohmann::json config_snapshot;
  std::vector<MetricRow> rows;
  std::vector<GridAuditEntry> audit;
  std::string version{kToolkitVersion};
  std::string started_at;
  double wall_seconds = 0.0;
};

// Dataset, then detector, then params; within a group the "all" row comes
// first, followed by entities in id order.
inline void sort_rows(std::vector<MetricRow>& rows) {
  auto key = [](const MetricRow& r) {
    return std::make_tuple(std::cref(r.dataset), std::cref(r.detector), std::cref(r.params),
                           r.entity_scope != kAllEntities, std::cref(r.entity_scope));
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const MetricRow& a, const MetricRow& b) { return key(a) < key(b); });
}

namespace detail {

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string render(const MetricValue& v, int decimals = 6) {
  if (!v.value) return "NA(" + v.reason + ")";
  return format_fixed(*v.value, decimals);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::vector<std::string> row_cells(const MetricRow& r) {
  using detail::render;
  return {detail::csv_field(r.dataset), detail::csv_field(r.entity_scope), detail::csv_field(r.detector),
          detail::csv_field(r.params), render(r.f1), render(r.f1_adj), render(r.f1_search),
          render(r.f1_search_adj), render(r.auc), render(r.theta_evt), render(r.theta_search),
          render(r.salience_raw), render(r.salience_norm), render(r.delay, 0), render(r.train_seconds),
          render(r.test_seconds)};
}

inline std::string report_csv(const Report& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) out << (i ? "," : "") << kReportColumns[i];
  out << '\n';
  for (const auto& row : report.rows) {
    const auto cells = row_cells(row);
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

inline std::string audit_csv(const Report& report) {
  std::ostringstream out;
  out << "dataset,detector,params,f1_search,selected\n";
  for (const auto& a : report.audit) {
    out << detail::csv_field(a.dataset) << ',' << detail::csv_field(a.detector) << ','
        << detail::csv_field(a.params) << ',' << detail::render(a.f1_search) << ',' << (a.selected ? 1 : 0)
        << '\n';
  }
  return out.str();
}

// Accuracy table per dataset (dataset-level rows only). Timings are left to
// the CSV so this file is fully determined by config and seed.
inline std::string report_summary(const Report& report) {
  std::map<std::string, std::vector<const MetricRow*>> by_dataset;
  for (const auto& row : report.rows) {
    if (row.entity_scope == kAllEntities) by_dataset[row.dataset].push_back(&row);
  }
  std::ostringstream out;
  out << "mtad " << report.version << " benchmark summary\n";
  char line[512];
  for (const auto& [dataset, rows] : by_dataset) {
    out << "\ndataset: " << dataset << "\n";
    std::snprintf(line, sizeof(line), "  %-18s %-34s %8s %8s %8s %8s %8s %10s %9s %7s\n", "detector", "params",
                  "F1", "F1*", "F1^", "F1^*", "AUC", "salience", "sal.norm", "delay");
    out << line;
    for (const auto* r : rows) {
      using detail::render;
      std::snprintf(line, sizeof(line), "  %-18s %-34s %8s %8s %8s %8s %8s %10s %9s %7s\n", r->detector.c_str(),
                    r->params.c_str(), render(r->f1, 4).c_str(), render(r->f1_adj, 4).c_str(),
                    render(r->f1_search, 4).c_str(), render(r->f1_search_adj, 4).c_str(),
                    render(r->auc, 4).c_str(), render(r->salience_raw, 4).c_str(),
                    render(r->salience_norm, 4).c_str(), render(r->delay, 0).c_str());
      out << line;
    }
  }
  return out.str();
}

struct ReportFiles {
  fs::path csv;
  fs::path summary;
  fs::path audit;
  fs::path meta;
};

namespace detail {
inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  out << text;
  out.close();
  require(!out.fail(), ErrorCode::io, "write failed: " + path.string());
}
}  // namespace detail

// Writes report.csv, summary.txt, grid_audit.csv and meta.json (config
// snapshot, version, wall-clock metadata) into `dir`.
inline ReportFiles emit_report(const Report& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  ReportFiles files{dir / "report.csv", dir / "summary.txt", dir / "grid_audit.csv", dir / "meta.json"};
  detail::write_text(files.csv, report_csv(report));
  detail::write_text(files.summary, report_summary(report));
  detail::write_text(files.audit, audit_csv(report));
  nlohmann::json meta{{"version", report.version},
                      {"started_at", report.started_at},
                      {"wall_seconds", report.wall_seconds},
                      {"config", report.config_snapshot}};
  detail::write_text(files.meta, meta.dump(2) + "\n");
  return files;
}

}  // namespace mtad
