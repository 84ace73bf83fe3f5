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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mtad/error.hpp"
#include "mtad/random.hpp"
#include "mtad/types.hpp"

namespace mtad::detectors {

inline std::size_t sturges_bins(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(1.0 + std::log2(static_cast<double>(std::max<std::size_t>(n, 1)))));
}

struct LodaParams {
  std::size_t n_projections = 100;
  std::size_t n_bins = 10;
  double density_floor = 1e-12;
};

// Ensemble of one-dimensional equal-width histograms over sparse random
// projections. The score is the mean negative log density; values that fall
// outside the train range, or into empty bins, get density_floor.
class LodaModel {
 public:
  static LodaModel fit(const KpiMatrix& train, const LodaParams& params, std::uint64_t seed) {
    require(params.n_projections >= 1, ErrorCode::invalid_argument, "loda: n_projections must be >= 1");
    require(params.n_bins >= 1, ErrorCode::invalid_argument, "loda: n_bins must be >= 1");
    require(params.density_floor > 0.0, ErrorCode::invalid_argument, "loda: density floor must be positive");
    const std::size_t m = train.cols();
    const auto nonzero = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));

    LodaModel model;
    model.cols_ = m;
    model.floor_ = params.density_floor;
    Rng rng(seed);
    std::vector<std::size_t> columns(m);
    std::vector<double> projected(train.rows());
    for (std::size_t p = 0; p < params.n_projections; ++p) {
      Projection proj;
      std::iota(columns.begin(), columns.end(), std::size_t{0});
      for (std::size_t i = 0; i < nonzero; ++i) {
        std::swap(columns[i], columns[i + rng.index(m - i)]);
        proj.columns.push_back(columns[i]);
        proj.weights.push_back(rng.normal());
      }

      for (std::size_t r = 0; r < train.rows(); ++r) projected[r] = proj.apply(train.row(r));
      const auto [lo_it, hi_it] = std::minmax_element(projected.begin(), projected.end());
      proj.lo = *lo_it;
      proj.hi = *hi_it;
      if (!(proj.hi > proj.lo)) {
        proj.lo -= 0.5;
        proj.hi += 0.5;
      }
      proj.width = (proj.hi - proj.lo) / static_cast<double>(params.n_bins);
      std::vector<std::size_t> counts(params.n_bins, 0);
      for (double z : projected) ++counts[proj.bin(z, params.n_bins)];
      proj.log_density.resize(params.n_bins);
      const double mass = static_cast<double>(train.rows()) * proj.width;
      for (std::size_t b = 0; b < params.n_bins; ++b) {
        proj.log_density[b] = std::log(std::max(static_cast<double>(counts[b]) / mass, model.floor_));
      }
      model.projections_.push_back(std::move(proj));
    }
    return model;
  }

  std::vector<double> score(const KpiMatrix& test) const {
    require(test.cols() == cols_, ErrorCode::dimension_mismatch, "loda: dimension mismatch");
    const double log_floor = std::log(floor_);
    std::vector<double> scores(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto x = test.row(i);
      double total = 0.0;
      for (const auto& proj : projections_) {
        const double z = proj.apply(x);
        total += (z < proj.lo || z > proj.hi) ? log_floor
                                              : proj.log_density[proj.bin(z, proj.log_density.size())];
      }
      scores[i] = -total / static_cast<double>(projections_.size());
    }
    return scores;
  }

 private:
  struct Projection {
    std::vector<std::size_t> columns;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;
    double width = 1.0;
    std::vector<double> log_density;

    double apply(std::span<const double> x) const {
      double z = 0.0;
      for (std::size_t i = 0; i < columns.size(); ++i) z += weights[i] * x[columns[i]];
      return z;
    }

    // Caller guarantees lo <= z <= hi; the top edge belongs to the last bin.
    std::size_t bin(double z, std::size_t n_bins) const {
      const auto b = static_cast<std::size_t>((z - lo) / width);
      return std::min(b, n_bins - 1);
    }
  };

  std::size_t cols_ = 0;
  double floor_ = 1e-12;
  std::vector<Projection> projections_;
};

inline ScoreSeries loda_score(const KpiMatrix& train, const KpiMatrix& test, std::size_t n_projections,
                              std::size_t n_bins, std::uint64_t seed) {
  return {LodaModel::fit(train, {n_projections, n_bins}, seed).score(test), std::nullopt};
}

}  // namespace mtad::detectors
