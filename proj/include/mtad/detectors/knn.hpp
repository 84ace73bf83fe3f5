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

struct KnnParams {
  std::size_t k = 10;
};

// Distance-based detector: the score of an observation is the Euclidean
// distance to its k-th nearest train observation.
class KnnModel {
 public:
  static KnnModel fit(const KpiMatrix& train, const KnnParams& params) {
    require(params.k >= 1, ErrorCode::invalid_argument, "knn: k must be positive");
    require(params.k <= train.rows(), ErrorCode::invalid_argument,
            "knn: k=" + std::to_string(params.k) + " exceeds train size " + std::to_string(train.rows()));
    KnnModel model;
    model.train_ = train;
    model.k_ = params.k;
    return model;
  }

  std::vector<double> score(const KpiMatrix& test) const {
    require(test.cols() == train_.cols(), ErrorCode::dimension_mismatch, "knn: dimension mismatch");
    std::vector<double> scores(test.rows());
    std::vector<double> dist(train_.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto x = test.row(i);
      for (std::size_t t = 0; t < train_.rows(); ++t) dist[t] = squared_distance(x, train_.row(t));
      auto kth = dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1);
      std::nth_element(dist.begin(), kth, dist.end());
      scores[i] = std::sqrt(*kth);
    }
    return scores;
  }

 private:
  KpiMatrix train_;
  std::size_t k_ = 0;
};

inline ScoreSeries knn_score(const KpiMatrix& train, const KpiMatrix& test, std::size_t k) {
  return {KnnModel::fit(train, {k}).score(test), std::nullopt};
}

}  // namespace mtad::detectors
