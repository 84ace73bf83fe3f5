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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtad/error.hpp"
#include "mtad/random.hpp"
#include "mtad/types.hpp"

namespace mtad {

namespace fs = std::filesystem;

struct LoadOptions {
  // Replace non-finite or empty cells with the previous row's value (0 on the
  // first row) instead of failing.
  bool ffill = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses one cell. Returns NaN for an empty cell; throws on garbage.
inline double parse_cell(std::string_view cell, const std::string& where) {
  cell = trim(cell);
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec == std::errc::result_out_of_range) {
    return cell.front() == '-' ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();
  }
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    fail(ErrorCode::parse, "non-numeric cell '" + std::string(cell) + "' at " + where);
  }
  return value;
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "missing file: " + path.string());
  return in;
}

}  // namespace detail

// Reads a headerless comma-separated matrix, one observation per line.
inline KpiMatrix read_matrix_csv(const fs::path& path, const LoadOptions& options = {}) {
  auto in = detail::open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::string_view rest = line;
    std::size_t n_cells = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto cell = rest.substr(0, comma);
      const std::string where = path.filename().string() + ":" + std::to_string(line_no);
      double v = detail::parse_cell(cell, where);
      if (!std::isfinite(v)) {
        require(options.ffill, ErrorCode::non_finite, "non-finite cell at " + where);
        v = rows == 0 ? 0.0 : values[(rows - 1) * cols + n_cells];
      }
      values.push_back(v);
      ++n_cells;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = n_cells;
    } else {
      require(n_cells == cols, ErrorCode::dimension_mismatch,
              "row " + std::to_string(line_no) + " of " + path.string() + " has " +
                  std::to_string(n_cells) + " cells, expected " + std::to_string(cols));
    }
    ++rows;
  }
  require(rows > 0, ErrorCode::parse, "empty matrix file: " + path.string());
  return KpiMatrix(rows, cols, std::move(values));
}

inline LabelVector read_labels_csv(const fs::path& path) {
  auto in = detail::open_input(path);
  std::vector<std::uint8_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const double v = detail::parse_cell(line, path.filename().string() + ":" + std::to_string(line_no));
    require(v == 0.0 || v == 1.0, ErrorCode::invalid_label,
            "invalid label '" + std::string(detail::trim(line)) + "' at " +
                path.filename().string() + ":" + std::to_string(line_no));
    labels.push_back(static_cast<std::uint8_t>(v));
  }
  return LabelVector(std::move(labels));
}

// One value per line, e.g. externally produced anomaly scores.
inline std::vector<double> read_series_csv(const fs::path& path) {
  auto in = detail::open_input(path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    const double v = detail::parse_cell(line, where);
    require(std::isfinite(v), ErrorCode::non_finite, "non-finite value at " + where);
    out.push_back(v);
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix_csv(const fs::path& path, const KpiMatrix& m) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  require(out.good(), ErrorCode::io, "write failed: " + path.string());
}

inline void write_series_csv(const fs::path& path, std::span<const double> values) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  for (double v : values) out << format_double(v) << '\n';
  require(out.good(), ErrorCode::io, "write failed: " + path.string());
}

inline void write_labels_csv(const fs::path& path, const LabelVector& labels) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  for (auto v : labels.values()) out << static_cast<int>(v) << '\n';
  require(out.good(), ErrorCode::io, "write failed: " + path.string());
}

// Expects <dir>/{train.csv,test.csv,test_label.csv}.
inline LabeledEntity load_entity(const fs::path& dir, const LoadOptions& options = {}) {
  LabeledEntity entity;
  entity.entity_id = dir.filename().string();
  if (entity.entity_id.empty()) entity.entity_id = dir.parent_path().filename().string();
  entity.train = read_matrix_csv(dir / "train.csv", options);
  entity.test = read_matrix_csv(dir / "test.csv", options);
  entity.test_labels = read_labels_csv(dir / "test_label.csv");
  entity.validate();
  return entity;
}

inline void write_entity(const fs::path& dir, const LabeledEntity& entity) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  write_matrix_csv(dir / "train.csv", entity.train);
  write_matrix_csv(dir / "test.csv", entity.test);
  write_labels_csv(dir / "test_label.csv", entity.test_labels);
}

// Entity subdirectories in lexicographic order.
inline Dataset load_dataset(const fs::path& dir, const LoadOptions& options = {}) {
  std::error_code ec;
  require(fs::is_directory(dir, ec), ErrorCode::io, "dataset directory not found: " + dir.string());
  std::vector<fs::path> entity_dirs;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (item.is_directory()) entity_dirs.push_back(item.path());
  }
  std::sort(entity_dirs.begin(), entity_dirs.end());
  require(!entity_dirs.empty(), ErrorCode::io, "dataset has no entities: " + dir.string());

  Dataset dataset;
  dataset.name = fs::absolute(dir).lexically_normal().filename().string();
  if (dataset.name.empty()) dataset.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  for (const auto& d : entity_dirs) dataset.entities.push_back(load_entity(d, options));
  return dataset;
}

inline KpiMatrix select_columns(const KpiMatrix& m, const std::vector<std::size_t>& columns) {
  std::vector<double> values;
  values.reserve(m.rows() * columns.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (auto j : columns) values.push_back(m(i, j));
  }
  std::vector<std::string> names;
  if (!m.kpi_names().empty()) {
    for (auto j : columns) names.push_back(m.kpi_names()[j]);
  }
  return KpiMatrix(m.rows(), columns.size(), std::move(values), std::move(names));
}

// Removes KPIs whose train split holds a single repeated value. The test split
// is filtered with the same column selection.
inline std::pair<LabeledEntity, std::vector<std::size_t>> drop_constant_kpis(const LabeledEntity& entity) {
  entity.validate();
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < entity.train.cols(); ++j) {
    const double first = entity.train(0, j);
    for (std::size_t i = 1; i < entity.train.rows(); ++i) {
      if (entity.train(i, j) != first) {
        kept.push_back(j);
        break;
      }
    }
  }
  require(!kept.empty(), ErrorCode::no_informative_kpis,
          "no informative KPIs: every train column of '" + entity.entity_id + "' is constant");
  LabeledEntity out{entity.entity_id, select_columns(entity.train, kept),
                    select_columns(entity.test, kept), entity.test_labels};
  return {std::move(out), std::move(kept)};
}

struct ColumnStats {
  double mean = 0.0;
  double std = 0.0;
};

// Per-KPI z-score fitted on train (population std), applied to both splits.
inline std::pair<LabeledEntity, std::vector<ColumnStats>> standardize(const LabeledEntity& entity) {
  entity.validate();
  const auto& train = entity.train;
  const auto n = static_cast<double>(train.rows());
  std::vector<ColumnStats> stats(train.cols());
  for (std::size_t j = 0; j < train.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) sum += train(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const double d = train(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    require(sd > 0.0 && std::isfinite(sd), ErrorCode::zero_variance,
            "zero train standard deviation in column " + std::to_string(j));
    stats[j] = {mean, sd};
  }
  auto apply = [&](const KpiMatrix& m) {
    std::vector<double> values(m.values());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        auto& v = values[i * m.cols() + j];
        v = (v - stats[j].mean) / stats[j].std;
      }
    }
    return KpiMatrix(m.rows(), m.cols(), std::move(values), m.kpi_names());
  };
  LabeledEntity out{entity.entity_id, apply(entity.train), apply(entity.test), entity.test_labels};
  return {std::move(out), std::move(stats)};
}

struct PreprocessOptions {
  bool drop_constant = true;
  bool standardize = true;
  bool ffill = false;
};

inline LabeledEntity preprocess(const LabeledEntity& entity, const PreprocessOptions& options) {
  LabeledEntity out = entity;
  if (options.drop_constant) out = drop_constant_kpis(out).first;
  if (options.standardize) out = standardize(out).first;
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

enum class AnomalyShape { spike, level_shift, long_segment };

inline AnomalyShape parse_shape(std::string_view name) {
  if (name == "spike") return AnomalyShape::spike;
  if (name == "level_shift") return AnomalyShape::level_shift;
  if (name == "long_segment") return AnomalyShape::long_segment;
  fail(ErrorCode::invalid_argument, "unknown anomaly shape '" + std::string(name) + "'");
}

inline std::string_view shape_name(AnomalyShape s) {
  switch (s) {
    case AnomalyShape::spike: return "spike";
    case AnomalyShape::level_shift: return "level_shift";
    case AnomalyShape::long_segment: return "long_segment";
  }
  return "unknown";
}

struct InjectionSpec {
  std::size_t n = 2000;
  std::size_t m = 8;
  double anomaly_ratio = 0.05;
  std::set<AnomalyShape> shapes{AnomalyShape::spike};
  std::uint64_t seed = 0;
};

inline constexpr double kSpikeSigma = 8.0;
inline constexpr double kShiftSigma = 4.0;
inline constexpr std::size_t kLevelShiftLength = 20;

namespace detail {

// Lengths of the anomalous events to inject. Total equals round(n * ratio).
inline std::vector<std::pair<AnomalyShape, std::size_t>> plan_events(const InjectionSpec& spec) {
  const auto n = spec.n;
  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.anomaly_ratio));
  const bool has_long = spec.shapes.count(AnomalyShape::long_segment) > 0;
  const bool has_shift = spec.shapes.count(AnomalyShape::level_shift) > 0;
  const bool has_spike = spec.shapes.count(AnomalyShape::spike) > 0;

  std::vector<std::pair<AnomalyShape, std::size_t>> events;
  std::size_t remaining = target;
  if (has_long) {
    std::size_t budget = (has_shift || has_spike) ? (target + 1) / 2 : target;
    const auto tenth = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
    const std::size_t seg = std::min(budget, std::max(tenth, (target + 1) / 2));
    remaining -= budget;
    while (budget > 0) {
      const auto len = std::min(seg, budget);
      events.emplace_back(AnomalyShape::long_segment, len);
      budget -= len;
    }
  }
  std::size_t shift_budget = 0;
  std::size_t spike_budget = 0;
  if (has_shift && has_spike) {
    shift_budget = remaining / 2;
    spike_budget = remaining - shift_budget;
  } else if (has_shift) {
    shift_budget = remaining;
  } else {
    spike_budget = remaining;
  }
  while (shift_budget > 0) {
    const auto len = std::min(kLevelShiftLength, shift_budget);
    events.emplace_back(AnomalyShape::level_shift, len);
    shift_budget -= len;
  }
  for (std::size_t i = 0; i < spike_budget; ++i) events.emplace_back(AnomalyShape::spike, 1);
  return events;
}

}  // namespace detail

// Generates a labeled entity: AR(1) background driven by a shared latent
// factor (cross-KPI correlation) with injected anomalies in the test split.
// Train and test each hold spec.n observations; train is anomaly-free.
inline LabeledEntity inject_anomalies(const InjectionSpec& spec) {
  require(spec.m >= 1 && spec.n >= 2, ErrorCode::invalid_argument, "n must be >= 2 and m >= 1");
  require(spec.anomaly_ratio > 0.0 && spec.anomaly_ratio < 1.0, ErrorCode::invalid_argument,
          "anomaly_ratio must lie strictly between 0 and 1");
  require(static_cast<double>(spec.n) * spec.anomaly_ratio >= 1.0, ErrorCode::invalid_argument,
          "n * anomaly_ratio must be at least 1");
  require(!spec.shapes.empty(), ErrorCode::invalid_argument, "at least one anomaly shape required");

  const std::size_t n = spec.n;
  const std::size_t m = spec.m;
  Rng rng(spec.seed);

  std::vector<double> phi(m), loading(m), scale(m), offset(m);
  for (std::size_t j = 0; j < m; ++j) {
    phi[j] = rng.uniform(0.5, 0.95);
    loading[j] = rng.uniform(0.4, 0.8);
    scale[j] = rng.uniform(0.5, 5.0);
    offset[j] = rng.uniform(-10.0, 10.0);
  }
  constexpr double kLatentPhi = 0.95;

  // Both AR processes start from their stationary distribution; every KPI has
  // unit variance before scaling, so sigma_j == scale[j].
  std::vector<double> values(2 * n * m);
  double latent = rng.normal();
  std::vector<double> noise(m);
  for (auto& e : noise) e = rng.normal();
  for (std::size_t t = 0; t < 2 * n; ++t) {
    if (t > 0) latent = kLatentPhi * latent + std::sqrt(1.0 - kLatentPhi * kLatentPhi) * rng.normal();
    for (std::size_t j = 0; j < m; ++j) {
      if (t > 0) noise[j] = phi[j] * noise[j] + std::sqrt(1.0 - phi[j] * phi[j]) * rng.normal();
      const double z = loading[j] * latent + std::sqrt(1.0 - loading[j] * loading[j]) * noise[j];
      values[t * m + j] = offset[j] + scale[j] * z;
    }
  }
  std::vector<double> train_values(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n * m));
  std::vector<double> test_values(values.begin() + static_cast<std::ptrdiff_t>(n * m), values.end());

  // Events keep one normal point between each other so every event is its own
  // labeled segment.
  std::vector<std::uint8_t> labels(n, 0);
  auto is_free = [&](std::size_t start, std::size_t len) {
    const std::size_t lo = start == 0 ? 0 : start - 1;
    const std::size_t hi = std::min(n - 1, start + len);
    for (std::size_t i = lo; i <= hi; ++i) {
      if (labels[i]) return false;
    }
    return true;
  };
  const std::size_t affected = (m + 1) / 2;
  for (const auto& [shape, len] : detail::plan_events(spec)) {
    require(len <= n, ErrorCode::invalid_argument, "anomaly longer than the series");
    const std::size_t slots = n - len + 1;
    std::size_t start = slots;
    for (int attempt = 0; attempt < 1000 && start == slots; ++attempt) {
      const auto s = rng.index(slots);
      if (is_free(s, len)) start = s;
    }
    if (start == slots) {
      const auto origin = rng.index(slots);
      for (std::size_t k = 0; k < slots; ++k) {
        const auto s = (origin + k) % slots;
        if (is_free(s, len)) {
          start = s;
          break;
        }
      }
    }
    require(start != slots, ErrorCode::invalid_argument,
            "cannot place anomalies: anomaly_ratio too high for separated events");

    std::vector<std::size_t> kpis(m);
    for (std::size_t j = 0; j < m; ++j) kpis[j] = j;
    for (std::size_t j = 0; j < affected; ++j) std::swap(kpis[j], kpis[j + rng.index(m - j)]);
    const double sigmas = shape == AnomalyShape::spike ? kSpikeSigma : kShiftSigma;
    for (std::size_t t = start; t < start + len; ++t) {
      labels[t] = 1;
      for (std::size_t j = 0; j < affected; ++j) test_values[t * m + kpis[j]] += sigmas * scale[kpis[j]];
    }
  }

  LabeledEntity entity{"synthetic", KpiMatrix(n, m, std::move(train_values)),
                       KpiMatrix(n, m, std::move(test_values)), LabelVector(std::move(labels))};
  return entity;
}

}  // namespace mtad
