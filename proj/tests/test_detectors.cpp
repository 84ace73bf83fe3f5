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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtad/detectors.hpp"
#include "mtad/random.hpp"
#include "oracles.hpp"

namespace mtad {
namespace {

using detectors::iforest_score;
using detectors::knn_score;
using detectors::loda_score;
using detectors::lof_score;
using detectors::pca_score;

KpiMatrix random_matrix(Rng& rng, std::size_t n, std::size_t m, double scale = 1.0) {
  std::vector<double> v(n * m);
  for (auto& x : v) x = rng.normal() * scale;
  return KpiMatrix(n, m, std::move(v));
}

KpiMatrix grid_10x10() {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) rows.push_back({static_cast<double>(i), static_cast<double>(j)});
  }
  return KpiMatrix::from_rows(rows);
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

TEST(Knn, Examples) {
  const auto train = KpiMatrix::from_rows({{0, 0}, {1, 0}});
  const auto test = KpiMatrix::from_rows({{0, 0}, {10, 0}});
  EXPECT_EQ(knn_score(train, test, 1).raw, (std::vector<double>{0.0, 9.0}));
  EXPECT_EQ(knn_score(train, test, 2).raw, (std::vector<double>{1.0, 10.0}));
  EXPECT_THROW(knn_score(train, test, 3), Error);
  EXPECT_THROW(knn_score(train, KpiMatrix::from_rows({{1, 2, 3}}), 1), Error);
}

TEST(Knn, MatchesBruteForce) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.index(196);
    const std::size_t m = 1 + rng.index(5);
    const auto train = random_matrix(rng, n, m);
    const auto test = random_matrix(rng, 20, m);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(n, 10));
    EXPECT_EQ(knn_score(train, test, k).raw, oracle::knn(oracle::rows_of(train), oracle::rows_of(test), k));
  }
}

TEST(Lof, GridExamples) {
  const auto grid = grid_10x10();
  const auto s = lof_score(grid, KpiMatrix::from_rows({{4.5, 4.5}, {104.5, 4.5}}), 8).raw;
  EXPECT_GE(s[0], 0.9);
  EXPECT_LE(s[0], 1.1);
  EXPECT_GT(s[1], 1.5);
  EXPECT_THROW(lof_score(grid, grid, 100), Error);
}

TEST(Lof, MatchesTextbookDefinition) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 12 + rng.index(89);
    const std::size_t m = 1 + rng.index(4);
    auto train = random_matrix(rng, n, m);
    if (trial % 3 == 0) {
      // Coarse grid values to create duplicate points and distance ties.
      std::vector<double> v(train.values().begin(), train.values().end());
      for (auto& x : v) x = std::round(x);
      train = KpiMatrix(n, m, std::move(v));
    }
    const auto test = random_matrix(rng, 15, m, 1.5);
    const std::size_t k = 1 + rng.index(10);
    const auto got = lof_score(train, test, k).raw;
    const auto want = oracle::lof(oracle::rows_of(train), oracle::rows_of(test), k);
    EXPECT_LT(max_rel_error(got, want), 1e-9) << "trial " << trial;
  }
}

TEST(Pca, Examples) {
  Rng rng(3);
  const auto train = random_matrix(rng, 200, 3);
  const auto col_mean = [&](std::size_t j) {
    const auto c = train.column(j);
    return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  };
  const auto at_mean = KpiMatrix::from_rows({{col_mean(0), col_mean(1), col_mean(2)}});
  EXPECT_NEAR(pca_score(train, at_mean, 1e-9).raw[0], 0.0, 1e-20);

  // Full-rank correlated 2-D Gaussian.
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 500; ++i) {
    const double a = rng.normal(), b = rng.normal();
    rows.push_back({2.0 * a + 3.0, 0.8 * a + 0.5 * b - 1.0});
  }
  const auto gauss = KpiMatrix::from_rows(rows);
  const auto test = random_matrix(rng, 50, 2, 3.0);
  EXPECT_LT(max_rel_error(pca_score(gauss, test, 1e-9).raw,
                          oracle::mahalanobis(oracle::rows_of(gauss), oracle::rows_of(test), 1e-9)),
            1e-6);

  // Duplicated column makes the covariance singular.
  std::vector<std::vector<double>> dup;
  for (int i = 0; i < 50; ++i) {
    const double a = rng.normal();
    dup.push_back({a, a, rng.normal()});
  }
  const auto scores = pca_score(KpiMatrix::from_rows(dup), KpiMatrix::from_rows({{1, 0, 0}, {1, 1, 0}}), 1e-6).raw;
  for (double s : scores) EXPECT_TRUE(std::isfinite(s));
  EXPECT_THROW(pca_score(KpiMatrix::from_rows({{1, 2}}), KpiMatrix::from_rows({{1, 2}}), 1e-9), Error);
}

TEST(Pca, RotationInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 2 + rng.index(4);
    const auto train = random_matrix(rng, 100, m);
    const auto test = random_matrix(rng, 30, m, 2.0);
    Eigen::MatrixXd r(m, m);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(r).householderQ();
    auto rotate = [&](const KpiMatrix& x) {
      std::vector<double> out(x.rows() * m);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        Eigen::VectorXd v(m);
        for (std::size_t j = 0; j < m; ++j) v[static_cast<Eigen::Index>(j)] = x(i, j);
        const Eigen::VectorXd w = q * v;
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] = w[static_cast<Eigen::Index>(j)];
      }
      return KpiMatrix(x.rows(), m, std::move(out));
    };
    EXPECT_LT(max_rel_error(pca_score(rotate(train), rotate(test), 1e-9).raw, pca_score(train, test, 1e-9).raw),
              1e-6);
  }
}

TEST(IForest, Examples) {
  Rng rng(5);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 300; ++i) rows.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  const auto train = KpiMatrix::from_rows(rows);
  rows.resize(50);
  rows.push_back({100, 100, 100});
  const auto test = KpiMatrix::from_rows(rows);
  const auto a = iforest_score(train, test, 100, 256, 7).raw;
  EXPECT_EQ(a, iforest_score(train, test, 100, 256, 7).raw);
  EXPECT_NE(a, iforest_score(train, test, 100, 256, 8).raw);
  EXPECT_GT(a.back(), 0.6);
  for (std::size_t i = 0; i + 1 < a.size(); ++i) EXPECT_LT(a[i], a.back());

  const auto twin = KpiMatrix::from_rows({{1, 1}, {1, 1}});
  const auto t = iforest_score(twin, KpiMatrix::from_rows({{0, 0}, {5, 5}}), 1, 2, 1).raw;
  EXPECT_EQ(t[0], t[1]);
  EXPECT_THROW(iforest_score(twin, twin, 1, 3, 1), Error);
}

TEST(IForest, PathNormalizer) {
  EXPECT_EQ(detectors::average_path_length(1), 0.0);
  EXPECT_EQ(detectors::average_path_length(2), 1.0);
  // The ln-based form approximates 2 H(255) - 2*255/256 to within 1/255.
  double h = 0.0;
  for (int i = 1; i <= 255; ++i) h += 1.0 / i;
  EXPECT_NEAR(detectors::average_path_length(256), 2.0 * h - 2.0 * 255.0 / 256.0, 1.0 / 255.0);
}

TEST(Loda, Examples) {
  Rng rng(6);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) {
    const double c = i % 2 ? 10.0 : -10.0;
    rows.push_back({c + rng.normal() * 0.5, c + rng.normal() * 0.5});
  }
  const auto train = KpiMatrix::from_rows(rows);
  rows.resize(40);
  const auto inliers = KpiMatrix::from_rows(rows);
  rows.push_back({0.0, 0.0});
  const auto test = KpiMatrix::from_rows(rows);
  const auto s = loda_score(train, test, 50, 20, 3).raw;
  EXPECT_EQ(s, loda_score(train, test, 50, 20, 3).raw);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) EXPECT_LT(s[i], s.back());

  // One projection, one bin: every in-range point sees the same density.
  const auto flat = loda_score(train, inliers, 1, 1, 9).raw;
  for (double v : flat) EXPECT_EQ(v, flat.front());
}

TEST(Dispatch, TimingAndValidation) {
  Rng rng(7);
  const auto train = random_matrix(rng, 100, 3);
  const auto test = random_matrix(rng, 100, 3);
  const auto r = fit_and_score({DetectorKind::knn, {}, 0}, train, test);
  EXPECT_EQ(r.scores.raw.size(), 100u);
  EXPECT_GT(r.train_seconds, 0.0);
  EXPECT_GT(r.test_seconds, 0.0);
  try {
    fit_and_score({DetectorKind::knn, {{"k", "0"}}, 0}, train, test);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
  EXPECT_THROW(fit_and_score({DetectorKind::lof, {{"neighbours", "3"}}, 0}, train, test), Error);
  const auto s1 = fit_and_score({DetectorKind::iforest, {}, 1}, train, test).scores.raw;
  const auto s2 = fit_and_score({DetectorKind::iforest, {}, 2}, train, test).scores.raw;
  EXPECT_NE(s1, s2);
  EXPECT_EQ(s1, fit_and_score({DetectorKind::iforest, {}, 1}, train, test).scores.raw);
}

TEST(Dispatch, GridExpansion) {
  const auto points = expand_grid(DetectorKind::iforest, default_grid(DetectorKind::iforest));
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(canonical_params(points.front()), "n_trees=100;subsample=128");
  EXPECT_EQ(expand_grid(DetectorKind::knn, default_grid(DetectorKind::knn)).size(), 4u);
  EXPECT_EQ(expand_grid(DetectorKind::loda, default_grid(DetectorKind::loda)).size(), 4u);
}

TEST(DetectorProperties, TestRowOrderIndependent) {
  Rng rng(8);
  const auto train = random_matrix(rng, 120, 4);
  const auto test = random_matrix(rng, 40, 4);
  std::vector<std::size_t> perm(test.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[17]);
  std::vector<double> pv;
  for (auto i : perm) pv.insert(pv.end(), test.row(i).begin(), test.row(i).end());
  const KpiMatrix permuted(test.rows(), 4, pv);
  for (auto kind : kAllDetectors) {
    const DetectorConfig config{kind, {}, 99};
    const auto base = fit_and_score(config, train, test).scores.raw;
    const auto moved = fit_and_score(config, train, permuted).scores.raw;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      ASSERT_EQ(moved[i], base[perm[i]]) << kind_name(kind);
    }
  }
}

}  // namespace
}  // namespace mtad
