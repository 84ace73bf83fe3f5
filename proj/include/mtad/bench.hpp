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
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mtad/data.hpp"
#include "mtad/detectors.hpp"
#include "mtad/error.hpp"
#include "mtad/metrics.hpp"
#include "mtad/report.hpp"
#include "mtad/thresholding.hpp"
#include "mtad/timing.hpp"

namespace mtad {

struct ThresholdOptions {
  // evt and fixed fill the f1/f1_adj/theta_evt columns; search leaves them
  // NA. The searched pair (f1_search, f1_search_adj) is always computed.
  ThresholdStrategy strategy = ThresholdStrategy::evt;
  double risk_q = 1e-3;
  double init_quantile = 0.98;
  double theta = 0.5;
};

// Everything the protocol derives from one entity's scores and labels.
struct EntityEvaluation {
  std::vector<double> normalized;
  LabelVector labels;

  std::optional<ThresholdResult> primary;  // EVT or fixed threshold
  std::string primary_reason;              // set when `primary` is absent
  ConfusionCounts primary_counts;
  ConfusionCounts primary_adjusted_counts;

  ThresholdResult search;
  ConfusionCounts search_counts;
  ConfusionCounts search_adjusted_counts;

  double auc = 0.5;
  SalienceBreakdown salience;
  std::size_t delay = 0;

  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

inline EntityEvaluation evaluate_entity(std::span<const double> raw_scores, const LabelVector& labels,
                                        const ThresholdOptions& options) {
  require(raw_scores.size() == labels.size(), ErrorCode::length_mismatch,
          "score count " + std::to_string(raw_scores.size()) + " != label count " + std::to_string(labels.size()));
  require(labels.has_both_classes(), ErrorCode::degenerate_labels,
          "degenerate labels: need at least one anomalous and one normal point");
  EntityEvaluation e;
  e.normalized = normalize_scores(raw_scores);
  e.labels = labels;

  switch (options.strategy) {
    case ThresholdStrategy::evt:
      try {
        e.primary = pot_threshold(e.normalized, options.risk_q, options.init_quantile);
      } catch (const Error& err) {
        e.primary_reason = "evt_" + std::string(reason_code(err.code()));
      }
      break;
    case ThresholdStrategy::fixed:
      e.primary = fixed_threshold(options.theta);
      break;
    case ThresholdStrategy::search:
      e.primary_reason = "not_requested";
      break;
  }
  if (e.primary) {
    const auto pred = apply_threshold(e.normalized, e.primary->theta);
    e.primary_counts = confusion(pred, labels);
    e.primary_adjusted_counts = confusion(adjust_points(pred, labels), labels);
  }

  e.search = search_threshold(e.normalized, labels);
  const auto search_pred = apply_threshold(e.normalized, e.search.theta);
  e.search_counts = confusion(search_pred, labels);
  e.search_adjusted_counts = confusion(adjust_points(search_pred, labels), labels);
  e.delay = compute_delay(search_pred, labels);
  e.auc = auc(e.normalized, labels);
  e.salience = compute_salience(e.normalized, labels);
  return e;
}

inline MetricRow keyed_row(const std::string& dataset, const std::string& scope, const std::string& detector,
                           const std::string& params) {
  MetricRow r;
  r.dataset = dataset;
  r.entity_scope = scope;
  r.detector = detector;
  r.params = params;
  return r;
}

inline MetricRow entity_row(const EntityEvaluation& e, const std::string& dataset, const std::string& scope,
                            const std::string& detector, const std::string& params) {
  MetricRow r = keyed_row(dataset, scope, detector, params);
  if (e.primary) {
    r.f1 = MetricValue::of(scores_from_counts(e.primary_counts).f1);
    r.f1_adj = MetricValue::of(scores_from_counts(e.primary_adjusted_counts).f1);
    r.theta_evt = MetricValue::of(e.primary->theta);
  } else {
    r.f1 = r.f1_adj = r.theta_evt = MetricValue::na(e.primary_reason);
  }
  r.f1_search = MetricValue::of(scores_from_counts(e.search_counts).f1);
  r.f1_search_adj = MetricValue::of(scores_from_counts(e.search_adjusted_counts).f1);
  r.theta_search = MetricValue::of(e.search.theta);
  r.auc = MetricValue::of(e.auc);
  r.salience_raw = MetricValue::of(e.salience.salience);
  r.salience_norm = MetricValue::na("pending");
  r.delay = MetricValue::of(static_cast<double>(e.delay));
  r.train_seconds = MetricValue::of(e.train_seconds);
  r.test_seconds = MetricValue::of(e.test_seconds);
  return r;
}

inline MetricRow failure_row(const std::string& dataset, const std::string& scope, const std::string& detector,
                             const std::string& params, const std::string& reason) {
  MetricRow r = keyed_row(dataset, scope, detector, params);
  for (auto* cell : {&r.f1, &r.f1_adj, &r.f1_search, &r.f1_search_adj, &r.auc, &r.theta_evt, &r.theta_search,
                     &r.salience_raw, &r.salience_norm, &r.delay, &r.train_seconds, &r.test_seconds}) {
    *cell = MetricValue::na(reason);
  }
  return r;
}

// Dataset-level row: each entity keeps its own thresholds, confusion counts
// are summed, AUC runs over the concatenated normalized scores, salience and
// delay are summed over entities.
inline MetricRow aggregate_row(const std::vector<const EntityEvaluation*>& entities, const std::string& dataset,
                               const std::string& detector, const std::string& params) {
  require(!entities.empty(), ErrorCode::invalid_argument, "nothing to aggregate");
  if (entities.size() == 1) return entity_row(*entities.front(), dataset, std::string(kAllEntities), detector, params);

  MetricRow r = keyed_row(dataset, std::string(kAllEntities), detector, params);
  ConfusionCounts primary, primary_adj, search, search_adj;
  std::string primary_reason;
  std::vector<double> all_scores;
  std::vector<std::uint8_t> all_labels;
  std::vector<double> saliences;
  double delay = 0.0, train = 0.0, test = 0.0;
  for (const auto* e : entities) {
    if (e->primary) {
      primary += e->primary_counts;
      primary_adj += e->primary_adjusted_counts;
    } else if (primary_reason.empty()) {
      primary_reason = e->primary_reason;
    }
    search += e->search_counts;
    search_adj += e->search_adjusted_counts;
    all_scores.insert(all_scores.end(), e->normalized.begin(), e->normalized.end());
    all_labels.insert(all_labels.end(), e->labels.values().begin(), e->labels.values().end());
    saliences.push_back(e->salience.salience);
    delay += static_cast<double>(e->delay);
    train += e->train_seconds;
    test += e->test_seconds;
  }
  if (primary_reason.empty()) {
    r.f1 = MetricValue::of(scores_from_counts(primary).f1);
    r.f1_adj = MetricValue::of(scores_from_counts(primary_adj).f1);
  } else {
    r.f1 = r.f1_adj = MetricValue::na(primary_reason);
  }
  r.theta_evt = MetricValue::na(primary_reason.empty() ? "per_entity" : primary_reason);
  r.theta_search = MetricValue::na("per_entity");
  r.f1_search = MetricValue::of(scores_from_counts(search).f1);
  r.f1_search_adj = MetricValue::of(scores_from_counts(search_adj).f1);
  r.auc = MetricValue::of(auc(all_scores, LabelVector(std::move(all_labels))));
  r.salience_raw = MetricValue::of(aggregate_entity_salience(saliences));
  r.salience_norm = MetricValue::na("pending");
  r.delay = MetricValue::of(delay);
  r.train_seconds = MetricValue::of(train);
  r.test_seconds = MetricValue::of(test);
  return r;
}

// Evaluates externally produced scores against labels.
inline MetricRow evaluate_scores(std::span<const double> raw_scores, const LabelVector& labels,
                                 const ThresholdOptions& options, const std::string& dataset = "-") {
  auto e = evaluate_entity(raw_scores, labels, options);
  auto row = entity_row(e, dataset, std::string(kAllEntities), "external", "-");
  row.salience_norm = MetricValue::of(1.0);
  row.train_seconds = row.test_seconds = MetricValue::na("external");
  return row;
}

inline MetricRow evaluate_scores(const fs::path& score_file, const fs::path& label_file,
                                 const ThresholdOptions& options) {
  const auto scores = read_series_csv(score_file);
  const auto labels = read_labels_csv(label_file);
  return evaluate_scores(scores, labels, options, score_file.stem().string());
}

// ---------------------------------------------------------------------------
// Configuration

struct ExternalSource {
  std::string name;
  std::string dataset;   // matched against the dataset directory name
  fs::path scores_dir;   // holds <entity_id>.csv, one raw score per line
};

struct BenchConfig {
  std::vector<fs::path> dataset_paths;
  std::map<DetectorKind, ParamGrid> detector_grids;
  std::vector<ExternalSource> external;
  ThresholdOptions threshold;
  PreprocessOptions preprocessing;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  fs::path output_dir = "mtad_report";
};

namespace detail {

inline std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  require(v.is_number(), ErrorCode::invalid_argument, "grid values must be numbers or strings");
  return v.dump();
}

inline fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace detail

// Parses the JSON benchmark configuration. Relative paths resolve against
// `base_dir` (the config file's directory).
inline BenchConfig parse_bench_config(const nlohmann::json& j, const fs::path& base_dir = ".") {
  require(j.is_object(), ErrorCode::invalid_argument, "config must be a JSON object");
  static const std::vector<std::string> known{"datasets", "detectors", "external", "threshold",
                                              "preprocessing", "seed", "parallelism", "output_dir"};
  for (const auto& [key, value] : j.items()) {
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorCode::invalid_argument,
            "unknown config key '" + key + "'");
  }
  BenchConfig c;
  try {
    require(j.contains("seed") && j["seed"].is_number_unsigned(), ErrorCode::invalid_argument,
            "config requires a non-negative integer 'seed'");
    c.seed = j["seed"].get<std::uint64_t>();
    for (const auto& d : j.value("datasets", nlohmann::json::array())) {
      c.dataset_paths.push_back(detail::resolve_path(base_dir, d.get<std::string>()));
    }
    if (j.contains("detectors")) {
      for (const auto& [name, grid_json] : j["detectors"].items()) {
        const auto kind = parse_kind(name);
        ParamGrid grid;
        if (grid_json.is_string() && grid_json.get<std::string>() == "default") {
          grid = default_grid(kind);
        } else {
          require(grid_json.is_object(), ErrorCode::invalid_argument,
                  "detector grid for '" + name + "' must be an object or \"default\"");
          grid = grid_json.empty() ? default_grid(kind) : ParamGrid{};
          for (const auto& [param, values] : grid_json.items()) {
            auto& out = grid[param];
            if (values.is_array()) {
              for (const auto& v : values) out.push_back(detail::json_scalar_text(v));
            } else {
              out.push_back(detail::json_scalar_text(values));
            }
          }
        }
        c.detector_grids[kind] = std::move(grid);
      }
    }
    for (const auto& e : j.value("external", nlohmann::json::array())) {
      c.external.push_back({e.at("name").get<std::string>(), e.at("dataset").get<std::string>(),
                            detail::resolve_path(base_dir, e.at("scores_dir").get<std::string>())});
    }
    if (j.contains("threshold")) {
      const auto& t = j["threshold"];
      c.threshold.strategy = parse_strategy(t.value("strategy", "evt"));
      c.threshold.risk_q = t.value("q", c.threshold.risk_q);
      c.threshold.init_quantile = t.value("init_quantile", c.threshold.init_quantile);
      c.threshold.theta = t.value("theta", c.threshold.theta);
    }
    if (j.contains("preprocessing")) {
      const auto& p = j["preprocessing"];
      c.preprocessing.drop_constant = p.value("drop_constant", true);
      c.preprocessing.standardize = p.value("standardize", true);
      c.preprocessing.ffill = p.value("ffill", false);
    }
    c.parallelism = j.value("parallelism", std::size_t{1});
    if (j.contains("output_dir")) c.output_dir = detail::resolve_path(base_dir, j["output_dir"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed config: ") + e.what());
  }
  require(!c.dataset_paths.empty(), ErrorCode::invalid_argument, "config needs at least one dataset");
  require(!c.detector_grids.empty() || !c.external.empty(), ErrorCode::invalid_argument,
          "config needs at least one detector or external score source");
  require(c.parallelism >= 1, ErrorCode::invalid_argument, "parallelism must be >= 1");
  return c;
}

inline BenchConfig load_bench_config(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, "config is not valid JSON: " + std::string(e.what()));
  }
  return parse_bench_config(j, path.parent_path());
}

inline nlohmann::json to_json(const BenchConfig& c) {
  nlohmann::json j;
  j["datasets"] = nlohmann::json::array();
  for (const auto& p : c.dataset_paths) j["datasets"].push_back(p.generic_string());
  j["detectors"] = nlohmann::json::object();
  for (const auto& [kind, grid] : c.detector_grids) j["detectors"][std::string(kind_name(kind))] = grid;
  j["external"] = nlohmann::json::array();
  for (const auto& e : c.external) {
    j["external"].push_back({{"name", e.name}, {"dataset", e.dataset}, {"scores_dir", e.scores_dir.generic_string()}});
  }
  j["threshold"] = {{"strategy", strategy_name(c.threshold.strategy)},
                    {"q", c.threshold.risk_q},
                    {"init_quantile", c.threshold.init_quantile},
                    {"theta", c.threshold.theta}};
  j["preprocessing"] = {{"drop_constant", c.preprocessing.drop_constant},
                        {"standardize", c.preprocessing.standardize},
                        {"ffill", c.preprocessing.ffill}};
  j["seed"] = c.seed;
  j["parallelism"] = c.parallelism;
  j["output_dir"] = c.output_dir.generic_string();
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

// Runs body(i) for i in [0, n) on up to `workers` threads. body must not throw.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

struct PreparedEntity {
  std::string entity_id;
  std::optional<LabeledEntity> entity;
  std::string failure;  // reason code when preprocessing failed
};

struct PreparedDataset {
  std::string name;
  std::vector<PreparedEntity> entities;
};

inline PreparedDataset prepare_dataset(const Dataset& dataset, const PreprocessOptions& options) {
  PreparedDataset out{dataset.name, {}};
  for (const auto& entity : dataset.entities) {
    PreparedEntity p{entity.entity_id, std::nullopt, {}};
    try {
      p.entity = preprocess(entity, options);
    } catch (const Error& e) {
      p.failure = std::string(reason_code(e.code()));
    }
    out.entities.push_back(std::move(p));
  }
  return out;
}

struct RunOptions {
  ThresholdOptions threshold;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
};

struct EntityOutcome {
  std::string entity_id;
  std::optional<EntityEvaluation> evaluation;
  std::string reason;
};

struct GridPointOutcome {
  ParamMap params;
  std::vector<EntityOutcome> entities;
  std::optional<double> f1_search;  // dataset-level F^1 over successful entities
  std::size_t failures = 0;
};

struct GridSearchResult {
  ParamMap best_params;
  MetricRow best_row;
  std::vector<MetricRow> entity_rows;
  std::vector<GridPointOutcome> points;
};

namespace detail {

inline EntityOutcome run_entity_job(DetectorKind kind, const ParamMap& params, const PreparedEntity& prepared,
                                    const RunOptions& options) {
  EntityOutcome out{prepared.entity_id, std::nullopt, {}};
  if (!prepared.entity) {
    out.reason = prepared.failure;
    return out;
  }
  try {
    const DetectorConfig config{kind, params, options.seed};
    const auto detection = fit_and_score(config, *prepared.entity);
    SharedSection untimed;
    auto evaluation = evaluate_entity(detection.scores.raw, prepared.entity->test_labels, options.threshold);
    evaluation.train_seconds = detection.train_seconds;
    evaluation.test_seconds = detection.test_seconds;
    out.evaluation = std::move(evaluation);
  } catch (const Error& e) {
    out.reason = std::string(reason_code(e.code()));
  } catch (const std::exception&) {
    out.reason = std::string(reason_code(ErrorCode::detector_failed));
  }
  return out;
}

inline std::vector<const EntityEvaluation*> successes(const std::vector<EntityOutcome>& outcomes) {
  std::vector<const EntityEvaluation*> out;
  for (const auto& o : outcomes) {
    if (o.evaluation) out.push_back(&*o.evaluation);
  }
  return out;
}

}  // namespace detail

// Runs every grid point on every entity and picks the point with the best
// dataset-level F^1 (summed confusion counts at per-entity searched
// thresholds). Points that failed on some entity only compete when no point
// succeeded everywhere. Ties keep the earlier canonical parameter string.
inline GridSearchResult grid_search(DetectorKind kind, const ParamGrid& grid, const PreparedDataset& dataset,
                                    const RunOptions& options) {
  const auto points = expand_grid(kind, grid);
  require(!points.empty(), ErrorCode::invalid_argument, "empty parameter grid");
  const std::size_t n_entities = dataset.entities.size();

  std::vector<EntityOutcome> outcomes(points.size() * n_entities);
  parallel_for(outcomes.size(), options.parallelism, [&](std::size_t job) {
    outcomes[job] = detail::run_entity_job(kind, points[job / n_entities], dataset.entities[job % n_entities], options);
  });

  GridSearchResult result;
  for (std::size_t p = 0; p < points.size(); ++p) {
    GridPointOutcome point;
    point.params = points[p];
    for (std::size_t e = 0; e < n_entities; ++e) {
      auto& o = outcomes[p * n_entities + e];
      point.failures += o.evaluation ? 0 : 1;
      point.entities.push_back(std::move(o));
    }
    ConfusionCounts summed;
    for (const auto* ev : detail::successes(point.entities)) summed += ev->search_counts;
    if (point.failures < n_entities) point.f1_search = scores_from_counts(summed).f1;
    result.points.push_back(std::move(point));
  }

  std::optional<std::size_t> best;
  for (bool require_complete : {true, false}) {
    for (std::size_t p = 0; p < result.points.size(); ++p) {
      const auto& pt = result.points[p];
      if (!pt.f1_search || (require_complete && pt.failures > 0)) continue;
      if (!best || *pt.f1_search > *result.points[*best].f1_search) best = p;
    }
    if (best) break;
  }
  if (!best) {
    const auto& first = result.points.front().entities.front();
    fail(ErrorCode::detector_failed, std::string(kind_name(kind)) + " failed on every grid point (first reason: " +
                                         first.reason + ")");
  }

  const auto& chosen = result.points[*best];
  const std::string detector(kind_name(kind));
  const std::string params = canonical_params(chosen.params);
  result.best_params = chosen.params;
  result.best_row = aggregate_row(detail::successes(chosen.entities), dataset.name, detector, params);
  for (const auto& o : chosen.entities) {
    result.entity_rows.push_back(o.evaluation ? entity_row(*o.evaluation, dataset.name, o.entity_id, detector, params)
                                              : failure_row(dataset.name, o.entity_id, detector, params, o.reason));
  }
  return result;
}

namespace detail {

inline void normalize_salience(std::vector<MetricRow>& rows, std::size_t begin) {
  // Group by (dataset, scope) across detectors.
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> groups;
  for (std::size_t i = begin; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.salience_raw.value) groups[{r.dataset, r.entity_scope}][r.detector] = *r.salience_raw.value;
  }
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> normalized;
  for (const auto& [key, values] : groups) normalized[key] = normalize_across_methods(values);
  for (std::size_t i = begin; i < rows.size(); ++i) {
    auto& r = rows[i];
    if (r.salience_raw.value) {
      r.salience_norm = MetricValue::of(normalized[{r.dataset, r.entity_scope}][r.detector]);
    } else {
      r.salience_norm = r.salience_raw;
    }
  }
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Full protocol over every configured dataset. Dataset loading failures
// abort; detector and entity failures become NA(<reason>) cells.
inline Report run_benchmark(const BenchConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  Report report;
  report.config_snapshot = to_json(config);
  report.started_at = detail::utc_timestamp();

  const RunOptions options{config.threshold, config.seed, config.parallelism};
  for (const auto& path : config.dataset_paths) {
    const auto dataset = load_dataset(path, LoadOptions{config.preprocessing.ffill});
    const auto prepared = prepare_dataset(dataset, config.preprocessing);
    const std::size_t first_row = report.rows.size();

    for (const auto& [kind, grid] : config.detector_grids) {
      const std::string detector(kind_name(kind));
      try {
        auto result = grid_search(kind, grid, prepared, options);
        report.rows.push_back(result.best_row);
        report.rows.insert(report.rows.end(), result.entity_rows.begin(), result.entity_rows.end());
        for (const auto& pt : result.points) {
          report.audit.push_back({dataset.name, detector, canonical_params(pt.params),
                                  pt.f1_search ? MetricValue::of(*pt.f1_search) : MetricValue::na("all_failed"),
                                  pt.params == result.best_params});
        }
      } catch (const Error& e) {
        report.rows.push_back(failure_row(dataset.name, std::string(kAllEntities), detector, "-",
                                          std::string(reason_code(e.code()))));
      }
    }

    for (const auto& source : config.external) {
      if (source.dataset != dataset.name) continue;
      const std::string detector = "external:" + source.name;
      std::vector<EntityOutcome> outcomes;
      for (const auto& entity : dataset.entities) {
        EntityOutcome o{entity.entity_id, std::nullopt, {}};
        try {
          const auto scores = read_series_csv(source.scores_dir / (entity.entity_id + ".csv"));
          o.evaluation = evaluate_entity(scores, entity.test_labels, config.threshold);
          o.evaluation->train_seconds = o.evaluation->test_seconds = 0.0;
        } catch (const Error& e) {
          o.reason = std::string(reason_code(e.code()));
        }
        outcomes.push_back(std::move(o));
      }
      const auto ok = detail::successes(outcomes);
      if (ok.empty()) {
        report.rows.push_back(failure_row(dataset.name, std::string(kAllEntities), detector, "-", outcomes.front().reason));
      } else {
        auto row = aggregate_row(ok, dataset.name, detector, "-");
        row.train_seconds = row.test_seconds = MetricValue::na("external");
        report.rows.push_back(row);
      }
      for (const auto& o : outcomes) {
        auto row = o.evaluation ? entity_row(*o.evaluation, dataset.name, o.entity_id, detector, "-")
                                : failure_row(dataset.name, o.entity_id, detector, "-", o.reason);
        if (o.evaluation) row.train_seconds = row.test_seconds = MetricValue::na("external");
        report.rows.push_back(std::move(row));
      }
    }
    detail::normalize_salience(report.rows, first_row);
  }
  sort_rows(report.rows);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace mtad
