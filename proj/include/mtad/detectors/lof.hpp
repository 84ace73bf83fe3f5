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
#include <string>
#include <vector>

#include "mtad/detectors/distance.hpp"
#include "mtad/error.hpp"
#include "mtad/types.hpp"

namespace mtad::detectors {

struct LofParams {
  std::size_t k = 20;
};

// Local outlier factor against train neighborhoods.
//
// The k-neighborhood of a point holds every train point whose distance does
// not exceed its k-distance, so ties (duplicates included) can enlarge it
// beyond k. A train point never counts as its own neighbor. The local
// reachability density is 1 / (mean reachability distance + kLrdEpsilon),
// which keeps densities finite when k or more duplicates coincide.
class LofModel {
 public:
  static constexpr double kLrdEpsilon = 1e-10;

  static LofModel fit(const KpiMatrix& train, const LofParams& params) {
    require(params.k >= 1, ErrorCode::invalid_argument, "lof: k must be positive");
    require(params.k < train.rows(), ErrorCode::invalid_argument,
            "lof: k=" + std::to_string(params.k) + " must be smaller than train size " +
                std::to_string(train.rows()));
    LofModel model;
    model.train_ = train;
    model.k_ = params.k;
    const std::size_t n = train.rows();
    model.k_distance_.resize(n);
    model.lrd_.resize(n);

    std::vector<double> dist(n);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) {
      model.distances_from_train(i, dist);
      model.k_distance_[i] = kth_excluding(dist, i, model.k_, scratch);
    }
    for (std::size_t i = 0; i < n; ++i) {
      model.distances_from_train(i, dist);
      double reach_sum = 0.0;
      std::size_t count = 0;
      for (std::size_t o = 0; o < n; ++o) {
        if (o == i || dist[o] > model.k_distance_[i]) continue;
        reach_sum += std::max(model.k_distance_[o], dist[o]);
        ++count;
      }
      model.lrd_[i] = 1.0 / (reach_sum / static_cast<double>(count) + kLrdEpsilon);
    }
    return model;
  }

  std::vector<double> score(const KpiMatrix& test) const {
    require(test.cols() == train_.cols(), ErrorCode::dimension_mismatch, "lof: dimension mismatch");
    const std::size_t n = train_.rows();
    std::vector<double> scores(test.rows());
    std::vector<double> dist(n);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto x = test.row(i);
      for (std::size_t o = 0; o < n; ++o) dist[o] = euclidean_distance(x, train_.row(o));
      scratch.assign(dist.begin(), dist.end());
      auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
      std::nth_element(scratch.begin(), kth, scratch.end());
      const double k_dist = *kth;
      double reach_sum = 0.0;
      double lrd_sum = 0.0;
      std::size_t count = 0;
      for (std::size_t o = 0; o < n; ++o) {
        if (dist[o] > k_dist) continue;
        reach_sum += std::max(k_distance_[o], dist[o]);
        lrd_sum += lrd_[o];
        ++count;
      }
      const double lrd_x = 1.0 / (reach_sum / static_cast<double>(count) + kLrdEpsilon);
      scores[i] = (lrd_sum / static_cast<double>(count)) / lrd_x;
    }
    return scores;
  }

 private:
  void distances_from_train(std::size_t i, std::vector<double>& dist) const {
    const auto p = train_.row(i);
    for (std::size_t o = 0; o < train_.rows(); ++o) dist[o] = euclidean_distance(p, train_.row(o));
  }

  static double kth_excluding(const std::vector<double>& dist, std::size_t self, std::size_t k,
                              std::vector<double>& scratch) {
    scratch.clear();
    for (std::size_t o = 0; o < dist.size(); ++o) {
      if (o != self) scratch.push_back(dist[o]);
    }
    auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(scratch.begin(), kth, scratch.end());
    return *kth;
  }

  KpiMatrix train_;
  std::size_t k_ = 0;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

inline ScoreSeries lof_score(const KpiMatrix& train, const KpiMatrix& test, std::size_t k) {
  return {LofModel::fit(train, {k}).score(test), std::nullopt};
}

}  // namespace mtad::detectors
