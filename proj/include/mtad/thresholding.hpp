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
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtad/error.hpp"
#include "mtad/types.hpp"

namespace mtad {

enum class ThresholdStrategy { evt, search, fixed };

inline std::string_view strategy_name(ThresholdStrategy s) {
  switch (s) {
    case ThresholdStrategy::evt: return "evt";
    case ThresholdStrategy::search: return "search";
    case ThresholdStrategy::fixed: return "fixed";
  }
  return "unknown";
}

inline ThresholdStrategy parse_strategy(std::string_view name) {
  if (name == "evt") return ThresholdStrategy::evt;
  if (name == "search") return ThresholdStrategy::search;
  if (name == "fixed") return ThresholdStrategy::fixed;
  fail(ErrorCode::invalid_argument, "unknown threshold strategy '" + std::string(name) + "'");
}

enum class GpdFit { grimshaw, moments, exponential };

inline std::string_view gpd_fit_name(GpdFit f) {
  switch (f) {
    case GpdFit::grimshaw: return "grimshaw";
    case GpdFit::moments: return "moments";
    case GpdFit::exponential: return "exponential";
  }
  return "unknown";
}

struct EvtParams {
  double init_quantile = 0.0;  // quantile actually used for the initial threshold
  double risk_q = 0.0;
  double gamma_hat = 0.0;
  double sigma_hat = 0.0;
  std::size_t n_excesses = 0;
  double initial_threshold = 0.0;
  GpdFit fit = GpdFit::grimshaw;
};

struct ThresholdResult {
  double theta = 0.0;
  ThresholdStrategy strategy = ThresholdStrategy::fixed;
  std::optional<EvtParams> evt_params;
  std::optional<double> search_f1;
};

struct PredictionVector {
  std::vector<std::uint8_t> values;
  bool adjusted = false;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const PredictionVector&, const PredictionVector&) = default;
};

// Min-max normalization to [0, 1]; a constant series maps to all zeros.
inline std::vector<double> normalize_scores(std::span<const double> raw) {
  require(!raw.empty(), ErrorCode::invalid_argument, "cannot normalize an empty score series");
  for (double v : raw) require(std::isfinite(v), ErrorCode::non_finite, "scores must be finite");
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(raw.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::clamp((raw[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

// Observation i is anomalous iff score_i >= theta.
inline PredictionVector apply_threshold(std::span<const double> normalized, double theta) {
  require(!std::isnan(theta), ErrorCode::invalid_argument, "threshold must not be NaN");
  PredictionVector pred;
  pred.values.resize(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) pred.values[i] = normalized[i] >= theta ? 1 : 0;
  return pred;
}

namespace detail {

inline double f1_from(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  const double pc = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double rc = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * pc * rc / (pc + rc);
}

// Linear-interpolation empirical quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double gpd_log_likelihood(const std::vector<double>& y, double gamma, double sigma) {
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  const auto n = static_cast<double>(y.size());
  if (gamma == 0.0) {
    double sum = 0.0;
    for (double v : y) sum += v;
    return -n * std::log(sigma) - sum / sigma;
  }
  double sum = 0.0;
  for (double v : y) {
    const double t = 1.0 + gamma * v / sigma;
    if (!(t > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += std::log(t);
  }
  return -n * std::log(sigma) - (1.0 + 1.0 / gamma) * sum;
}

struct GpdEstimate {
  double gamma = 0.0;
  double sigma = 0.0;
  GpdFit fit = GpdFit::exponential;
};

// Grimshaw's reduction of the GPD likelihood to one equation in
// x = gamma / sigma:  w(x) = (1 + mean log(1 + x y)) * mean 1/(1 + x y) - 1.
// Non-trivial roots lie in (-1/y_max, 0) and (0, 2 (mean - y_min) / y_min^2).
// Both intervals are scanned on a fixed grid, sign changes refined by
// bisection; among the roots (and the exponential fit, x -> 0) the one with
// the highest likelihood wins. Without any root, method of moments competes
// with the exponential fit instead.
inline GpdEstimate fit_gpd(const std::vector<double>& y) {
  const auto n = static_cast<double>(y.size());
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = 0.0;
  double mean = 0.0;
  for (double v : y) {
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
    mean += v;
  }
  mean /= n;

  auto w = [&](double x) {
    double log_sum = 0.0;
    double inv_sum = 0.0;
    for (double v : y) {
      const double s = 1.0 + x * v;
      log_sum += std::log(s);
      inv_sum += 1.0 / s;
    }
    return (1.0 + log_sum / n) * (inv_sum / n) - 1.0;
  };

  constexpr int kGridPoints = 600;
  constexpr int kBisections = 200;
  std::vector<double> grid;
  grid.reserve(2 * kGridPoints);
  // Left interval, logistic spacing so both ends are resolved.
  const double left_end = -1.0 / y_max;
  for (int i = 0; i < kGridPoints; ++i) {
    const double z = -18.0 + 36.0 * i / (kGridPoints - 1);
    grid.push_back(left_end / (1.0 + std::exp(-z)));
  }
  // Right interval, geometric spacing from 1e-6 / y_max. The upper bound
  // explodes when the smallest excess is near zero, so the lower end is tied
  // to the data scale rather than to the bound.
  if (y_min > 0.0 && mean > y_min) {
    const double right_end = 2.0 * (mean - y_min) / (y_min * y_min);
    const double right_start = std::min(1e-6 / y_max, 1e-8 * right_end);
    const double log_span = std::log(right_end / right_start);
    for (int i = 0; i < kGridPoints; ++i) {
      grid.push_back(right_start * std::exp(log_span * static_cast<double>(i) / (kGridPoints - 1)));
    }
  }
  std::sort(grid.begin(), grid.end());

  std::vector<double> roots;
  double prev_x = grid.front();
  double prev_w = w(prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double wx = w(x);
    if (std::isfinite(prev_w) && std::isfinite(wx) && ((prev_w < 0.0) != (wx < 0.0)) &&
        ((prev_x < 0.0) == (x < 0.0))) {
      double lo = prev_x, hi = x, w_lo = prev_w;
      for (int it = 0; it < kBisections && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double w_mid = w(mid);
        if ((w_mid < 0.0) == (w_lo < 0.0)) {
          lo = mid;
          w_lo = w_mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_w = wx;
  }

  GpdEstimate best{0.0, mean, GpdFit::exponential};
  double best_ll = gpd_log_likelihood(y, 0.0, mean);
  for (double x : roots) {
    if (x == 0.0) continue;
    double gamma = 0.0;
    for (double v : y) gamma += std::log1p(x * v);
    gamma /= n;
    const double sigma = gamma / x;
    const double ll = gpd_log_likelihood(y, gamma, sigma);
    if (std::isfinite(ll) && ll > best_ll) {
      best_ll = ll;
      best = {gamma, sigma, GpdFit::grimshaw};
    }
  }
  if (roots.empty()) {
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= std::max(n - 1.0, 1.0);
    if (var > 0.0) {
      const double ratio = mean * mean / var;
      const double gamma = 0.5 * (1.0 - ratio);
      const double sigma = 0.5 * mean * (ratio + 1.0);
      const double ll = gpd_log_likelihood(y, gamma, sigma);
      if (std::isfinite(ll) && ll > best_ll) best = {gamma, sigma, GpdFit::moments};
    }
  }
  return best;
}

}  // namespace detail

inline constexpr std::size_t kMinExcesses = 10;
inline constexpr double kLowestInitQuantile = 0.90;

// Peaks-over-threshold: fit a generalized Pareto distribution to the excesses
// above the empirical init_quantile and extrapolate the score exceeded with
// probability risk_q. The result is clamped to [0, 1].
inline ThresholdResult pot_threshold(std::span<const double> normalized, double risk_q = 1e-3,
                                     double init_quantile = 0.98) {
  require(risk_q > 0.0 && risk_q < 1.0, ErrorCode::invalid_argument, "risk_q must lie in (0, 1)");
  require(init_quantile > 0.5 && init_quantile < 1.0, ErrorCode::invalid_argument,
          "init_quantile must lie in (0.5, 1)");
  require(!normalized.empty(), ErrorCode::invalid_argument, "empty score series");
  std::vector<double> sorted(normalized.begin(), normalized.end());
  std::sort(sorted.begin(), sorted.end());
  require(sorted.back() > sorted.front(), ErrorCode::constant_scores, "cannot fit a tail to constant scores");

  // Lower the initial quantile in 0.01 steps until the tail has enough points.
  double q0 = init_quantile;
  double t = 0.0;
  std::vector<double> excesses;
  for (int step = 0;; ++step) {
    q0 = std::max(init_quantile - 0.01 * step, kLowestInitQuantile);
    t = detail::quantile_sorted(sorted, q0);
    excesses.clear();
    for (auto it = std::upper_bound(sorted.begin(), sorted.end(), t); it != sorted.end(); ++it) {
      excesses.push_back(*it - t);
    }
    if (excesses.size() >= kMinExcesses || q0 <= kLowestInitQuantile) break;
  }
  require(excesses.size() >= kMinExcesses, ErrorCode::insufficient_tail,
          "insufficient tail data: " + std::to_string(excesses.size()) + " excesses above the " +
              std::to_string(q0) + " quantile");

  const auto gpd = detail::fit_gpd(excesses);
  const double ratio = risk_q * static_cast<double>(sorted.size()) / static_cast<double>(excesses.size());
  double theta = 0.0;
  if (std::abs(gpd.gamma) < 1e-12) {
    theta = t - gpd.sigma * std::log(ratio);
  } else {
    theta = t + (gpd.sigma / gpd.gamma) * (std::pow(ratio, -gpd.gamma) - 1.0);
  }
  if (!std::isfinite(theta)) theta = 1.0;

  ThresholdResult result;
  result.theta = std::clamp(theta, 0.0, 1.0);
  result.strategy = ThresholdStrategy::evt;
  result.evt_params = EvtParams{q0, risk_q, gpd.gamma, gpd.sigma, excesses.size(), t, gpd.fit};
  return result;
}

inline constexpr int kSearchSteps = 100;

// Grid threshold k / 100, k = 0..100.
inline double search_grid_theta(int k) { return static_cast<double>(k) / kSearchSteps; }

// Enumerates theta over {0.00, 0.01, ..., 1.00} and keeps the one with the
// best unadjusted F1; ties go to the largest theta.
inline ThresholdResult search_threshold(std::span<const double> normalized, const LabelVector& labels) {
  require(normalized.size() == labels.size(), ErrorCode::length_mismatch, "scores and labels differ in length");
  require(labels.has_both_classes(), ErrorCode::degenerate_labels,
          "degenerate labels: need at least one anomalous and one normal point");
  double best_f1 = -1.0;
  int best_k = 0;
  for (int k = 0; k <= kSearchSteps; ++k) {
    const double theta = search_grid_theta(k);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      const bool predicted = normalized[i] >= theta;
      const bool actual = labels[i] == 1;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    const double f1 = detail::f1_from(tp, fp, fn);
    if (f1 >= best_f1) {
      best_f1 = f1;
      best_k = k;
    }
  }
  ThresholdResult result;
  result.theta = search_grid_theta(best_k);
  result.strategy = ThresholdStrategy::search;
  result.search_f1 = best_f1;
  return result;
}

inline ThresholdResult fixed_threshold(double theta) {
  require(theta >= 0.0 && theta <= 1.0, ErrorCode::invalid_argument, "fixed threshold must lie in [0, 1]");
  return ThresholdResult{theta, ThresholdStrategy::fixed, std::nullopt, std::nullopt};
}

}  // namespace mtad
