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
#include <string>
#include <vector>

#include "mtad/error.hpp"
#include "mtad/random.hpp"
#include "mtad/types.hpp"

namespace mtad::detectors {

struct IForestParams {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;
};

// Average path length of an unsuccessful BST search over n points.
inline double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const auto nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerGamma) - 2.0 * (nd - 1.0) / nd;
}

class IForestModel {
 public:
  static IForestModel fit(const KpiMatrix& train, const IForestParams& params, std::uint64_t seed) {
    require(params.n_trees >= 1, ErrorCode::invalid_argument, "iforest: n_trees must be >= 1");
    require(params.subsample >= 2, ErrorCode::invalid_argument, "iforest: subsample must be >= 2");
    require(params.subsample <= train.rows(), ErrorCode::invalid_argument,
            "iforest: subsample " + std::to_string(params.subsample) + " exceeds train size " +
                std::to_string(train.rows()));
    IForestModel model;
    model.cols_ = train.cols();
    model.subsample_ = params.subsample;
    const auto height_limit =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(params.subsample))));

    Rng rng(seed);
    std::vector<std::size_t> pool(train.rows());
    model.trees_.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < params.subsample; ++i) {
        std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      }
      std::vector<std::size_t> sample(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(params.subsample));
      Tree tree;
      tree.build(train, sample, 0, height_limit, rng);
      model.trees_.push_back(std::move(tree));
    }
    return model;
  }

  std::vector<double> score(const KpiMatrix& test) const {
    require(test.cols() == cols_, ErrorCode::dimension_mismatch, "iforest: dimension mismatch");
    const double normalizer = average_path_length(subsample_);
    std::vector<double> scores(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto x = test.row(i);
      double total = 0.0;
      for (const auto& tree : trees_) total += tree.path_length(x);
      const double mean_path = total / static_cast<double>(trees_.size());
      scores[i] = std::exp2(-mean_path / normalizer);
    }
    return scores;
  }

 private:
  struct Node {
    static constexpr std::uint32_t kLeaf = UINT32_MAX;
    std::uint32_t feature = kLeaf;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t size = 0;
  };

  struct Tree {
    std::vector<Node> nodes;

    std::uint32_t build(const KpiMatrix& data, std::vector<std::size_t>& rows, std::size_t depth,
                        std::size_t height_limit, Rng& rng) {
      const auto id = static_cast<std::uint32_t>(nodes.size());
      nodes.push_back({});
      nodes[id].size = static_cast<std::uint32_t>(rows.size());
      if (rows.size() <= 1 || depth >= height_limit) return id;

      // Split only on attributes that still vary inside this node.
      std::vector<std::size_t> candidates;
      std::vector<double> lo(data.cols()), hi(data.cols());
      for (std::size_t j = 0; j < data.cols(); ++j) {
        lo[j] = hi[j] = data(rows.front(), j);
        for (auto r : rows) {
          lo[j] = std::min(lo[j], data(r, j));
          hi[j] = std::max(hi[j], data(r, j));
        }
        if (hi[j] > lo[j]) candidates.push_back(j);
      }
      if (candidates.empty()) return id;

      const auto feature = candidates[rng.index(candidates.size())];
      double split = lo[feature] + rng.uniform() * (hi[feature] - lo[feature]);
      if (split <= lo[feature]) split = std::nextafter(lo[feature], hi[feature]);
      std::vector<std::size_t> left_rows, right_rows;
      for (auto r : rows) (data(r, feature) < split ? left_rows : right_rows).push_back(r);
      rows.clear();
      rows.shrink_to_fit();

      const auto left = build(data, left_rows, depth + 1, height_limit, rng);
      const auto right = build(data, right_rows, depth + 1, height_limit, rng);
      nodes[id].feature = static_cast<std::uint32_t>(feature);
      nodes[id].split = split;
      nodes[id].left = left;
      nodes[id].right = right;
      return id;
    }

    double path_length(std::span<const double> x) const {
      std::uint32_t id = 0;
      double depth = 0.0;
      while (nodes[id].feature != Node::kLeaf) {
        id = x[nodes[id].feature] < nodes[id].split ? nodes[id].left : nodes[id].right;
        depth += 1.0;
      }
      return depth + average_path_length(nodes[id].size);
    }
  };

  std::size_t cols_ = 0;
  std::size_t subsample_ = 0;
  std::vector<Tree> trees_;
};

inline ScoreSeries iforest_score(const KpiMatrix& train, const KpiMatrix& test, std::size_t n_trees,
                                 std::size_t subsample, std::uint64_t seed) {
  return {IForestModel::fit(train, {n_trees, subsample}, seed).score(test), std::nullopt};
}

}  // namespace mtad::detectors
