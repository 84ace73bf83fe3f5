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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtad/metrics.hpp"
#include "mtad/random.hpp"
#include "mtad/thresholding.hpp"
#include "oracles.hpp"

namespace mtad {
namespace {

PredictionVector pred_of(std::initializer_list<int> v) {
  PredictionVector p;
  for (int x : v) p.values.push_back(static_cast<std::uint8_t>(x));
  return p;
}

TEST(Segments, ExtractsMaximalRuns) {
  const auto s = extract_segments(LabelVector{0, 1, 1, 0, 1});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].start, 1u);
  EXPECT_EQ(s[0].end, 2u);
  EXPECT_EQ(s[1].start, 4u);
  EXPECT_EQ(s[1].end, 4u);
  EXPECT_TRUE(extract_segments(LabelVector{0, 0, 0}).empty());
  const auto all = extract_segments(LabelVector{1, 1, 1});
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].length(), 3u);
}

TEST(PrecisionRecall, Examples) {
  auto s = precision_recall_f1(pred_of({1, 1, 0, 0}), LabelVector{1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(s.pc, 0.5);
  EXPECT_DOUBLE_EQ(s.rc, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
  s = precision_recall_f1(pred_of({0, 1, 1}), LabelVector{0, 1, 1});
  EXPECT_DOUBLE_EQ(s.f1, 1.0);
  s = precision_recall_f1(pred_of({0, 0, 0}), LabelVector{0, 1, 1});
  EXPECT_EQ(s.pc, 0.0);
  EXPECT_EQ(s.rc, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(s.counts.total(), 3u);
}

TEST(PrecisionRecall, LengthMismatch) {
  try {
    confusion(pred_of({1, 0}), LabelVector{1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::length_mismatch);
  }
}

TEST(PointAdjust, Examples) {
  const LabelVector y{0, 1, 1, 1, 0, 0};
  const auto adj = adjust_points(pred_of({0, 0, 1, 0, 0, 1}), y);
  EXPECT_EQ(adj.values, pred_of({0, 1, 1, 1, 0, 1}).values);
  EXPECT_TRUE(adj.adjusted);
  EXPECT_EQ(adjust_points(pred_of({0, 0, 0, 0}), LabelVector{0, 1, 1, 0}).values, pred_of({0, 0, 0, 0}).values);
  EXPECT_EQ(adjust_points(pred_of({0, 1, 1, 0}), LabelVector{0, 1, 1, 0}).values, pred_of({0, 1, 1, 0}).values);
}

TEST(PointAdjust, RejectsDoubleAdjustment) {
  const LabelVector y{0, 1, 1};
  const auto adj = adjust_points(pred_of({0, 1, 0}), y);
  try {
    adjust_points(adj, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::double_adjustment);
  }
}

TEST(Auc, Examples) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.8, 0.1}, LabelVector{1, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.2, 0.9}, LabelVector{1, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.4, 0.4}, LabelVector{1, 0}), 0.5);
  EXPECT_THROW(auc(std::vector<double>{0.4, 0.3}, LabelVector{1, 1}), Error);
}

TEST(Clustering, Examples) {
  auto c = cluster_two_1d(std::vector<double>{0.1, 0.15, 0.7});
  EXPECT_EQ(c.lower, (std::vector<double>{0.1, 0.15}));
  EXPECT_EQ(c.upper, (std::vector<double>{0.7}));
  c = cluster_two_1d(std::vector<double>{10, 1, 11, 2});
  EXPECT_EQ(c.lower, (std::vector<double>{1, 2}));
  EXPECT_EQ(c.upper, (std::vector<double>{10, 11}));
  c = cluster_two_1d(std::vector<double>{0, 1, 0});
  EXPECT_EQ(c.lower, (std::vector<double>{0, 0}));
  EXPECT_EQ(c.upper, (std::vector<double>{1}));
  EXPECT_THROW(cluster_two_1d(std::vector<double>{1.0}), Error);
}

TEST(Clustering, LeftmostTieBreak) {
  // Gaps 1, 1, 1: the first merge joins {0,1}; then {0,1}+2 costs 2 and 2+3
  // costs 1, so {2,3} merge next.
  const auto c = cluster_two_1d(std::vector<double>{0, 1, 2, 3});
  EXPECT_EQ(c.lower, (std::vector<double>{0, 1}));
  EXPECT_EQ(c.upper, (std::vector<double>{2, 3}));
  const auto o = oracle::complete_linkage_two({0, 1, 2, 3});
  EXPECT_EQ(o.first, c.lower);
  EXPECT_EQ(o.second, c.upper);
}

TEST(Salience, WorkedExample) {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1, 0.15, 0.7};
  const LabelVector y{1, 1, 1, 0, 0, 0};
  const auto b = compute_salience(s, y);
  EXPECT_EQ(b.asp, (std::vector<double>{0.8, 0.9}));
  EXPECT_EQ(b.nsp, (std::vector<double>{0.7}));
  EXPECT_NEAR(b.mu_a, 0.85, 1e-12);
  EXPECT_NEAR(b.mu_n, 0.7, 1e-12);
  EXPECT_NEAR(b.w_a, 0.66076, 1e-5);
  EXPECT_NEAR(b.w_n, 0.58257, 1e-5);
  EXPECT_NEAR(b.salience, 0.15385, 1e-5);
  EXPECT_NEAR(b.salience, oracle::salience(s, y.values()), 1e-12);
}

TEST(Salience, DegenerateSetsAndSymmetry) {
  const auto pos = compute_salience(std::vector<double>{1, 1, 0, 0}, LabelVector{1, 1, 0, 0});
  EXPECT_NEAR(pos.salience, 0.62246, 1e-5);
  const auto neg = compute_salience(std::vector<double>{0, 0, 1, 1}, LabelVector{1, 1, 0, 0});
  EXPECT_NEAR(neg.salience, -pos.salience, 1e-9);
  EXPECT_THROW(compute_salience(std::vector<double>{1, 0}, LabelVector{1, 1}), Error);
}

TEST(Delay, Examples) {
  // segment (3,8), first hit at 5
  LabelVector y{0, 0, 0, 1, 1, 1, 1, 1, 1, 0};
  EXPECT_EQ(compute_delay(pred_of({0, 0, 0, 0, 0, 1, 0, 0, 0, 0}), y), 2u);
  EXPECT_EQ(compute_delay(pred_of({0, 0, 0, 1, 0, 0, 0, 0, 0, 0}), y), 0u);
  LabelVector y2{0, 0, 0, 1, 1, 1, 1, 0};
  EXPECT_EQ(compute_delay(pred_of({1, 0, 0, 0, 0, 0, 0, 1}), y2), 4u);
  EXPECT_THROW(compute_delay(pred_of({0, 0}), LabelVector{0, 0}), Error);
}

TEST(SalienceAggregation, SumAndNormalize) {
  EXPECT_NEAR(aggregate_entity_salience(std::vector<double>{0.1, 0.2, 0.3}), 0.6, 1e-12);
  EXPECT_EQ(aggregate_entity_salience(std::vector<double>{0.42}), 0.42);
  EXPECT_NEAR(aggregate_entity_salience(std::vector<double>{0.5, -0.2}), 0.3, 1e-12);
  EXPECT_THROW(aggregate_entity_salience(std::vector<double>{}), Error);

  const auto n = normalize_across_methods({{"a", 3}, {"b", 1}, {"c", 2}});
  EXPECT_DOUBLE_EQ(n.at("a"), 1.0);
  EXPECT_DOUBLE_EQ(n.at("b"), 0.0);
  EXPECT_DOUBLE_EQ(n.at("c"), 0.5);
  EXPECT_DOUBLE_EQ(normalize_across_methods({{"a", 7}}).at("a"), 1.0);
  const auto eq = normalize_across_methods({{"a", 2}, {"b", 2}});
  EXPECT_DOUBLE_EQ(eq.at("a"), 1.0);
  EXPECT_DOUBLE_EQ(eq.at("b"), 1.0);
}

// ---------------------------------------------------------------------------
// Properties

struct RandomCase {
  std::vector<double> scores;
  LabelVector labels;
};

LabelVector random_labels(Rng& rng, std::size_t n, bool both) {
  for (;;) {
    std::vector<std::uint8_t> y(n);
    // Runs of labels so segments have a realistic shape.
    std::uint8_t state = 0;
    for (auto& v : y) {
      if (rng.uniform() < 0.15) state ^= 1;
      v = state;
    }
    LabelVector labels(std::move(y));
    if (!both || labels.has_both_classes()) return labels;
  }
}

TEST(MetricProperties, AdjustmentIdempotentAndDominant) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.index(200);
    const auto y = random_labels(rng, n, false);
    PredictionVector p;
    for (std::size_t i = 0; i < n; ++i) p.values.push_back(rng.uniform() < 0.3 ? 1 : 0);
    const auto a = adjust_points(p, y);
    auto reset = a;
    reset.adjusted = false;
    EXPECT_EQ(adjust_points(reset, y).values, a.values);
    const auto raw = precision_recall_f1(p, y);
    const auto adj = precision_recall_f1(a, y);
    EXPECT_GE(adj.f1, raw.f1);
    EXPECT_EQ(adj.counts.fp, raw.counts.fp);
  }
}

TEST(MetricProperties, AucMatchesPairwiseAndIsRankInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(100);
    const auto y = random_labels(rng, n, true);
    std::vector<double> s(n);
    // Coarse values force ties.
    for (auto& v : s) v = std::round(rng.uniform() * 10.0) / 10.0;
    EXPECT_NEAR(auc(s, y), oracle::pairwise_auc(s, y.values()), 1e-12);
    std::vector<double> t(n);
    std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3.0 * v) - 7.0; });
    EXPECT_DOUBLE_EQ(auc(t, y), auc(s, y));
  }
}

TEST(MetricProperties, SalienceMatchesOracleAndIgnoresOrder) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(60);
    const auto y = random_labels(rng, n, true);
    std::vector<double> s(n);
    for (auto& v : s) v = std::round(rng.uniform() * 20.0) / 20.0;
    const double base = compute_salience(s, y).salience;
    EXPECT_NEAR(base, oracle::salience(s, y.values()), 1e-12);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    std::vector<double> ps(n);
    std::vector<std::uint8_t> py(n);
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] = s[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_NEAR(compute_salience(ps, LabelVector(py)).salience, base, 1e-12);
  }
}

TEST(MetricProperties, SalienceMonotoneUnderStableShift) {
  // Anomalous scores form two well-separated groups, so a small uniform shift
  // keeps the same support points.
  const LabelVector y{1, 1, 1, 1, 0, 0, 0, 0};
  std::vector<double> s{0.1, 0.12, 0.6, 0.62, 0.05, 0.3, 0.32, 0.0};
  double prev = compute_salience(s, y).salience;
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    auto shifted = s;
    for (std::size_t i = 0; i < 4; ++i) shifted[i] = std::min(1.0, s[i] + delta);
    const auto b = compute_salience(shifted, y);
    EXPECT_EQ(b.asp.size(), 2u);
    EXPECT_GE(b.salience, prev);
    prev = b.salience;
  }
}

TEST(MetricProperties, DelayAdditiveAndBounded) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(150);
    auto y = random_labels(rng, n, false);
    if (y.positives() == 0) continue;
    PredictionVector p;
    for (std::size_t i = 0; i < n; ++i) p.values.push_back(rng.uniform() < 0.2 ? 1 : 0);
    const auto total = compute_delay(p, y);
    EXPECT_LE(total, y.positives());
    std::size_t sum = 0;
    for (const auto& seg : extract_segments(y)) {
      std::vector<std::uint8_t> only(n, 0);
      for (std::size_t i = seg.start; i <= seg.end; ++i) only[i] = 1;
      sum += compute_delay(p, LabelVector(only));
    }
    EXPECT_EQ(total, sum);
  }
}

TEST(MetricProperties, ClusteringMatchesNaiveOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> v(n);
    const double grid = trial % 2 ? 8.0 : 1000.0;
    for (auto& x : v) x = std::round(rng.uniform() * grid) / grid;
    const auto fast = cluster_two_1d(v);
    const auto slow = oracle::complete_linkage_two(v);
    ASSERT_EQ(fast.lower, slow.first) << "trial " << trial;
    ASSERT_EQ(fast.upper, slow.second) << "trial " << trial;
  }
}

}  // namespace
}  // namespace mtad
