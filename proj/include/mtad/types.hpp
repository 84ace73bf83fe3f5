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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtad/error.hpp"

namespace mtad {

// Row-major n_observations x m_kpis matrix. Row i is one observation across
// all KPIs, column j one KPI over time.
class KpiMatrix {
 public:
  KpiMatrix() = default;

  KpiMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
            std::vector<std::string> kpi_names = {})
      : rows_(rows), cols_(cols), values_(std::move(values)),
        kpi_names_(std::move(kpi_names)) {
    require(rows_ >= 1 && cols_ >= 1, ErrorCode::invalid_argument,
            "matrix must have at least one row and one column");
    require(values_.size() == rows_ * cols_, ErrorCode::dimension_mismatch,
            "matrix value count does not match its shape");
    require(kpi_names_.empty() || kpi_names_.size() == cols_,
            ErrorCode::dimension_mismatch, "kpi name count does not match column count");
  }

  static KpiMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty(), ErrorCode::invalid_argument, "matrix must have at least one row");
    const std::size_t cols = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& row : rows) {
      require(row.size() == cols, ErrorCode::dimension_mismatch, "ragged rows");
      values.insert(values.end(), row.begin(), row.end());
    }
    return KpiMatrix(rows.size(), cols, std::move(values));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& kpi_names() const noexcept { return kpi_names_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  friend bool operator==(const KpiMatrix&, const KpiMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> kpi_names_;
};

// Ground-truth anomaly labels: 1 when the entity is anomalous at that
// observation, 0 otherwise.
class LabelVector {
 public:
  LabelVector() = default;

  explicit LabelVector(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
    for (auto v : labels_) {
      require(v == 0 || v == 1, ErrorCode::invalid_label, "invalid label: labels must be 0 or 1");
    }
  }

  LabelVector(std::initializer_list<int> labels) {
    labels_.reserve(labels.size());
    for (int v : labels) {
      require(v == 0 || v == 1, ErrorCode::invalid_label, "invalid label: labels must be 0 or 1");
      labels_.push_back(static_cast<std::uint8_t>(v));
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::uint8_t operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::uint8_t>& values() const noexcept { return labels_; }

  std::size_t positives() const {
    std::size_t count = 0;
    for (auto v : labels_) count += v;
    return count;
  }

  bool has_both_classes() const {
    const auto pos = positives();
    return pos > 0 && pos < labels_.size();
  }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::uint8_t> labels_;
};

struct LabeledEntity {
  std::string entity_id;
  KpiMatrix train;
  KpiMatrix test;
  LabelVector test_labels;

  void validate() const {
    require(train.cols() == test.cols(), ErrorCode::dimension_mismatch,
            "dimension mismatch: train has " + std::to_string(train.cols()) +
                " columns, test has " + std::to_string(test.cols()));
    require(test_labels.size() == test.rows(), ErrorCode::length_mismatch,
            "label count " + std::to_string(test_labels.size()) +
                " does not match test rows " + std::to_string(test.rows()));
  }

  friend bool operator==(const LabeledEntity&, const LabeledEntity&) = default;
};

struct Dataset {
  std::string name;
  std::vector<LabeledEntity> entities;
};

// Raw and min-max normalized anomaly scores for one test split. Higher raw
// score means more anomalous.
struct ScoreSeries {
  std::vector<double> raw;
  std::optional<std::vector<double>> normalized;
};

}  // namespace mtad
