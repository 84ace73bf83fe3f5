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
#include <map>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtad/error.hpp"
#include "mtad/thresholding.hpp"
#include "mtad/types.hpp"

namespace mtad {

// Inclusive index range of a maximal run of anomalous labels.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

inline std::vector<Segment> extract_segments(const LabelVector& labels) {
  std::vector<Segment> segments;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n;) {
    if (labels[i] == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && labels[j + 1] == 1) ++j;
    segments.push_back({i, j});
    i = j + 1;
  }
  return segments;
}

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct AccuracyScores {
  double pc = 0.0;
  double rc = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
};

// PC, RC and F1 are all 0 when there is no true positive.
inline AccuracyScores scores_from_counts(const ConfusionCounts& c) {
  AccuracyScores s;
  s.counts = c;
  if (c.tp == 0) return s;
  s.pc = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  s.rc = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  s.f1 = 2.0 * s.pc * s.rc / (s.pc + s.rc);
  return s;
}

inline ConfusionCounts confusion(const PredictionVector& pred, const LabelVector& labels) {
  require(pred.size() == labels.size(), ErrorCode::length_mismatch,
          "prediction length " + std::to_string(pred.size()) + " != label length " +
              std::to_string(labels.size()));
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.values[i] != 0;
    const bool a = labels[i] != 0;
    c.tp += p && a;
    c.fp += p && !a;
    c.fn += !p && a;
    c.tn += !p && !a;
  }
  return c;
}

inline AccuracyScores precision_recall_f1(const PredictionVector& pred, const LabelVector& labels) {
  return scores_from_counts(confusion(pred, labels));
}

// Point adjustment: a labeled segment with at least one predicted anomaly is
// marked as fully detected. Positions outside segments are left alone.
inline PredictionVector adjust_points(const PredictionVector& pred, const LabelVector& labels) {
  require(!pred.adjusted, ErrorCode::double_adjustment, "prediction vector is already point-adjusted");
  require(pred.size() == labels.size(), ErrorCode::length_mismatch, "prediction and label lengths differ");
  PredictionVector out = pred;
  out.adjusted = true;
  for (const auto& seg : extract_segments(labels)) {
    bool hit = false;
    for (std::size_t i = seg.start; i <= seg.end && !hit; ++i) hit = pred.values[i] != 0;
    if (hit) std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(seg.start),
                       out.values.begin() + static_cast<std::ptrdiff_t>(seg.end) + 1, std::uint8_t{1});
  }
  return out;
}

// Mann-Whitney AUC with midranks for ties.
inline double auc(std::span<const double> scores, const LabelVector& labels) {
  require(scores.size() == labels.size(), ErrorCode::length_mismatch, "scores and labels differ in length");
  require(labels.has_both_classes(), ErrorCode::degenerate_labels, "AUC needs both classes");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t r = i; r <= j; ++r) {
      if (labels[order[r]]) positive_rank_sum += midrank;
    }
    i = j + 1;
  }
  const auto n_pos = static_cast<double>(labels.positives());
  const double n_neg = static_cast<double>(n) - n_pos;
  return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

// ---------------------------------------------------------------------------
// Salience

struct TwoClusters {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Agglomerative complete-linkage clustering of 1-D values, stopped at two
// clusters. In one dimension complete-linkage clusters stay contiguous in
// sorted order and the linkage of two adjacent intervals is the span of their
// union, so it suffices to repeatedly merge the cheapest adjacent pair (the
// leftmost one on ties). Runs in O(n log n) with a lazy-deletion heap.
inline TwoClusters cluster_two_1d(std::span<const double> values) {
  require(values.size() >= 2, ErrorCode::invalid_argument, "clustering needs at least 2 values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();

  // Interval k spans sorted positions [first[k], last[k]]; intervals are
  // identified by their first position and linked left/right.
  std::vector<std::size_t> last(n), prev(n), next(n);
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    last[i] = i;
    prev[i] = i == 0 ? n : i - 1;
    next[i] = i + 1;  // n means none
  }
  struct Candidate {
    double cost;
    std::size_t left;
    std::size_t right;
    std::size_t right_last;
    std::size_t left_last;
  };
  auto worse = [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.left > b.left;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  auto push = [&](std::size_t left) {
    const std::size_t right = next[left];
    if (right >= n) return;
    heap.push({v[last[right]] - v[left], left, right, last[right], last[left]});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) push(i);

  std::size_t clusters = n;
  while (clusters > 2) {
    const Candidate c = heap.top();
    heap.pop();
    if (!alive[c.left] || !alive[c.right] || next[c.left] != c.right || last[c.right] != c.right_last ||
        last[c.left] != c.left_last) {
      continue;
    }
    last[c.left] = last[c.right];
    alive[c.right] = false;
    next[c.left] = next[c.right];
    if (next[c.left] < n) prev[next[c.left]] = c.left;
    --clusters;
    push(c.left);
    if (prev[c.left] < n) push(prev[c.left]);
  }

  std::size_t first = 0;
  const std::size_t second = next[first];
  TwoClusters out;
  out.lower.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(last[first]) + 1);
  out.upper.assign(v.begin() + static_cast<std::ptrdiff_t>(second), v.end());
  return out;
}

inline double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct SalienceBreakdown {
  std::vector<double> asp;  // anomaly support points
  std::vector<double> nsp;  // normal support points
  double mu_a = 0.0;
  double mu_n = 0.0;
  double w_a = 0.0;
  double w_n = 0.0;
  double salience = 0.0;
};

// Support points of one score set: the higher-mean cluster of a two-cluster
// complete-linkage split, or the whole set when it has one point or a single
// repeated value.
inline std::vector<double> support_points(std::span<const double> scores) {
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (scores.size() < 2 || *lo == *hi) return {scores.begin(), scores.end()};
  return cluster_two_1d(scores).upper;
}

// salience = w_a * mu_a - w_n * mu_n with w = sigmoid(|support| / (|ASP| + |NSP|)).
inline SalienceBreakdown compute_salience(std::span<const double> normalized, const LabelVector& labels) {
  require(normalized.size() == labels.size(), ErrorCode::length_mismatch, "scores and labels differ in length");
  require(labels.has_both_classes(), ErrorCode::degenerate_labels,
          "salience needs at least one anomalous and one normal point");
  std::vector<double> anomalous, normal;
  for (std::size_t i = 0; i < normalized.size(); ++i) (labels[i] ? anomalous : normal).push_back(normalized[i]);

  SalienceBreakdown s;
  s.asp = support_points(anomalous);
  s.nsp = support_points(normal);
  s.mu_a = mean_of(s.asp);
  s.mu_n = mean_of(s.nsp);
  const auto total = static_cast<double>(s.asp.size() + s.nsp.size());
  s.w_a = sigmoid(static_cast<double>(s.asp.size()) / total);
  s.w_n = sigmoid(static_cast<double>(s.nsp.size()) / total);
  s.salience = s.w_a * s.mu_a - s.w_n * s.mu_n;
  return s;
}

// Summed detection delay over labeled segments: index of the first predicted
// anomaly inside a segment minus the segment start. A segment that is never
// flagged contributes its full length.
inline std::size_t compute_delay(const PredictionVector& pred, const LabelVector& labels) {
  require(pred.size() == labels.size(), ErrorCode::length_mismatch, "prediction and label lengths differ");
  const auto segments = extract_segments(labels);
  require(!segments.empty(), ErrorCode::degenerate_labels, "delay needs at least one anomalous segment");
  std::size_t total = 0;
  for (const auto& seg : segments) {
    std::size_t delay = seg.length();
    for (std::size_t i = seg.start; i <= seg.end; ++i) {
      if (pred.values[i]) {
        delay = i - seg.start;
        break;
      }
    }
    total += delay;
  }
  return total;
}

inline double aggregate_entity_salience(std::span<const double> per_entity) {
  require(!per_entity.empty(), ErrorCode::invalid_argument, "no entity saliences to aggregate");
  return std::accumulate(per_entity.begin(), per_entity.end(), 0.0);
}

// Min-max across methods; a single method or all-equal values map to 1.
inline std::map<std::string, double> normalize_across_methods(const std::map<std::string, double>& per_method) {
  std::map<std::string, double> out;
  if (per_method.empty()) return out;
  double lo = per_method.begin()->second;
  double hi = lo;
  for (const auto& [name, v] : per_method) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& [name, v] : per_method) out[name] = hi > lo ? (v - lo) / (hi - lo) : 1.0;
  return out;
}

// F1 / F1* / F^1 / F^1* with their PC and RC.
struct AccuracyQuad {
  AccuracyScores f1_evt;
  AccuracyScores f1_evt_adjusted;
  AccuracyScores f1_search;
  AccuracyScores f1_search_adjusted;
};

}  // namespace mtad
