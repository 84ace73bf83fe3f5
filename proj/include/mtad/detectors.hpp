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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtad/data.hpp"
#include "mtad/detectors/iforest.hpp"
#include "mtad/detectors/knn.hpp"
#include "mtad/detectors/loda.hpp"
#include "mtad/detectors/lof.hpp"
#include "mtad/detectors/pca.hpp"
#include "mtad/error.hpp"
#include "mtad/timing.hpp"
#include "mtad/types.hpp"

namespace mtad {

enum class DetectorKind { knn, lof, pca, iforest, loda };

inline constexpr DetectorKind kAllDetectors[] = {DetectorKind::knn, DetectorKind::lof, DetectorKind::pca,
                                                 DetectorKind::iforest, DetectorKind::loda};

inline std::string_view kind_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::knn: return "knn";
    case DetectorKind::lof: return "lof";
    case DetectorKind::pca: return "pca";
    case DetectorKind::iforest: return "iforest";
    case DetectorKind::loda: return "loda";
  }
  return "unknown";
}

inline DetectorKind parse_kind(std::string_view name) {
  for (auto kind : kAllDetectors) {
    if (kind_name(kind) == name) return kind;
  }
  fail(ErrorCode::invalid_argument, "unknown detector '" + std::string(name) + "'");
}

using ParamMap = std::map<std::string, std::string>;
using ParamGrid = std::map<std::string, std::vector<std::string>>;

struct DetectorConfig {
  DetectorKind kind = DetectorKind::knn;
  ParamMap params;
  std::uint64_t seed = 0;
};

// "iforest.subsample=auto" resolves to min(256, n_train); "loda.n_bins" takes
// an integer, "sturges" or "2sturges".
inline ParamMap default_params(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::knn: return {{"k", "10"}};
    case DetectorKind::lof: return {{"k", "20"}};
    case DetectorKind::pca: return {{"eps", "1e-09"}};
    case DetectorKind::iforest: return {{"n_trees", "100"}, {"subsample", "auto"}};
    case DetectorKind::loda: return {{"n_bins", "sturges"}, {"n_projections", "100"}};
  }
  return {};
}

inline ParamGrid default_grid(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::knn: return {{"k", {"5", "10", "20", "50"}}};
    case DetectorKind::lof: return {{"k", {"10", "20", "50"}}};
    case DetectorKind::pca: return {{"eps", {"1e-09"}}};
    case DetectorKind::iforest: return {{"n_trees", {"100", "200"}}, {"subsample", {"128", "256"}}};
    case DetectorKind::loda: return {{"n_bins", {"sturges", "2sturges"}}, {"n_projections", {"50", "100"}}};
  }
  return {};
}

// Sorted by key (std::map order), "key=value" joined with ';'.
inline std::string canonical_params(const ParamMap& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    if (!out.empty()) out += ';';
    out += key + "=" + value;
  }
  return out;
}

inline ParamMap with_defaults(DetectorKind kind, const ParamMap& params) {
  ParamMap merged = default_params(kind);
  for (const auto& [key, value] : params) merged[key] = value;
  return merged;
}

// Cartesian product of the grid, with unspecified keys filled from defaults,
// ordered by canonical string.
inline std::vector<ParamMap> expand_grid(DetectorKind kind, const ParamGrid& grid) {
  std::vector<ParamMap> points{default_params(kind)};
  for (const auto& [key, values] : grid) {
    require(!values.empty(), ErrorCode::invalid_argument, "empty grid for parameter '" + key + "'");
    std::vector<ParamMap> next;
    for (const auto& point : points) {
      for (const auto& v : values) {
        auto p = point;
        p[key] = v;
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  std::sort(points.begin(), points.end(),
            [](const ParamMap& a, const ParamMap& b) { return canonical_params(a) < canonical_params(b); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

using ResolvedParams = std::variant<detectors::KnnParams, detectors::LofParams, detectors::PcaParams,
                                    detectors::IForestParams, detectors::LodaParams>;

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  require(ec == std::errc() && ptr == end, ErrorCode::invalid_argument,
          "parameter '" + key + "' expects a non-negative integer, got '" + value + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  require(ec == std::errc() && ptr == end && std::isfinite(out), ErrorCode::invalid_argument,
          "parameter '" + key + "' expects a real number, got '" + value + "'");
  return out;
}

}  // namespace detail

// Validates every parameter of `config` and resolves data-dependent values
// against the train size. Throws before any model work happens.
inline ResolvedParams resolve_params(const DetectorConfig& config, std::size_t n_train) {
  const ParamMap params = with_defaults(config.kind, config.params);
  const ParamMap known = default_params(config.kind);
  for (const auto& [key, value] : params) {
    require(known.count(key) > 0, ErrorCode::invalid_argument,
            "unknown parameter '" + key + "' for detector " + std::string(kind_name(config.kind)));
  }
  auto positive = [](const std::string& key, std::size_t v) {
    require(v >= 1, ErrorCode::invalid_argument, "parameter '" + key + "' must be positive");
    return v;
  };
  switch (config.kind) {
    case DetectorKind::knn: {
      const auto k = positive("k", detail::parse_count("k", params.at("k")));
      require(k <= n_train, ErrorCode::invalid_argument, "knn: k exceeds train size");
      return detectors::KnnParams{k};
    }
    case DetectorKind::lof: {
      const auto k = positive("k", detail::parse_count("k", params.at("k")));
      require(k < n_train, ErrorCode::invalid_argument, "lof: k must be smaller than train size");
      return detectors::LofParams{k};
    }
    case DetectorKind::pca: {
      const double eps = detail::parse_real("eps", params.at("eps"));
      require(eps > 0.0, ErrorCode::invalid_argument, "pca: eps must be positive");
      require(n_train >= 2, ErrorCode::invalid_argument, "pca: need at least 2 train rows");
      return detectors::PcaParams{eps};
    }
    case DetectorKind::iforest: {
      const auto trees = positive("n_trees", detail::parse_count("n_trees", params.at("n_trees")));
      const auto& sub = params.at("subsample");
      const std::size_t subsample =
          sub == "auto" ? std::min<std::size_t>(256, n_train) : detail::parse_count("subsample", sub);
      require(subsample >= 2, ErrorCode::invalid_argument, "iforest: subsample must be >= 2");
      require(subsample <= n_train, ErrorCode::invalid_argument, "iforest: subsample exceeds train size");
      return detectors::IForestParams{trees, subsample};
    }
    case DetectorKind::loda: {
      const auto projections =
          positive("n_projections", detail::parse_count("n_projections", params.at("n_projections")));
      const auto& bins_text = params.at("n_bins");
      std::size_t bins = 0;
      if (bins_text == "sturges") {
        bins = detectors::sturges_bins(n_train);
      } else if (bins_text == "2sturges") {
        bins = 2 * detectors::sturges_bins(n_train);
      } else {
        bins = positive("n_bins", detail::parse_count("n_bins", bins_text));
      }
      return detectors::LodaParams{projections, bins};
    }
  }
  fail(ErrorCode::invalid_argument, "unhandled detector kind");
}

using FittedModel = std::variant<detectors::KnnModel, detectors::LofModel, detectors::PcaModel,
                                 detectors::IForestModel, detectors::LodaModel>;

inline FittedModel fit_model(const ResolvedParams& params, const KpiMatrix& train, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> FittedModel {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, detectors::KnnParams>) return detectors::KnnModel::fit(train, p);
        if constexpr (std::is_same_v<P, detectors::LofParams>) return detectors::LofModel::fit(train, p);
        if constexpr (std::is_same_v<P, detectors::PcaParams>) return detectors::PcaModel::fit(train, p);
        if constexpr (std::is_same_v<P, detectors::IForestParams>)
          return detectors::IForestModel::fit(train, p, seed);
        if constexpr (std::is_same_v<P, detectors::LodaParams>) return detectors::LodaModel::fit(train, p, seed);
      },
      params);
}

inline std::vector<double> score_model(const FittedModel& model, const KpiMatrix& test) {
  return std::visit([&](const auto& m) { return m.score(test); }, model);
}

struct DetectionResult {
  ScoreSeries scores;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

// Fits on train and scores test. Only the fit and score calls are timed;
// parameter validation runs first, so invalid configs fail untimed.
inline DetectionResult fit_and_score(const DetectorConfig& config, const KpiMatrix& train, const KpiMatrix& test) {
  require(train.cols() == test.cols(), ErrorCode::dimension_mismatch, "dimension mismatch between train and test");
  const ResolvedParams params = resolve_params(config, train.rows());
  DetectionResult result;
  std::optional<FittedModel> model;
  result.train_seconds = time_phase([&] { model.emplace(fit_model(params, train, config.seed)); });
  result.test_seconds = time_phase([&] { result.scores.raw = score_model(*model, test); });
  return result;
}

inline DetectionResult fit_and_score(const DetectorConfig& config, const LabeledEntity& entity) {
  return fit_and_score(config, entity.train, entity.test);
}

}  // namespace mtad
