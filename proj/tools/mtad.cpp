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

// mtad command-line front end: run, detect, evaluate, gen.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtad/mtad.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  const auto config = mtad::load_bench_config(config_path);
  const auto report = mtad::run_benchmark(config);
  const auto files = mtad::emit_report(report, config.output_dir);
  std::cout << mtad::report_summary(report);
  std::cerr << "wrote " << files.csv.string() << "\n";
  return 0;
}

mtad::ParamMap parse_param_flags(const std::vector<std::string>& flags) {
  mtad::ParamMap params;
  for (const auto& flag : flags) {
    const auto eq = flag.find('=');
    mtad::require(eq != std::string::npos && eq > 0, mtad::ErrorCode::invalid_argument,
                  "--param expects key=value, got '" + flag + "'");
    params[flag.substr(0, eq)] = flag.substr(eq + 1);
  }
  return params;
}

struct DetectArgs {
  std::string detector, train, test, out;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  bool raw = false;
  bool ffill = false;
};

int cmd_detect(const DetectArgs& a) {
  const mtad::LoadOptions load{a.ffill};
  mtad::LabeledEntity entity{"detect", mtad::read_matrix_csv(a.train, load), mtad::read_matrix_csv(a.test, load), {}};
  mtad::require(entity.train.cols() == entity.test.cols(), mtad::ErrorCode::dimension_mismatch,
                "dimension mismatch between train and test");
  // Labels are not needed here; zeros keep the entity shape valid for preprocessing.
  entity.test_labels = mtad::LabelVector(std::vector<std::uint8_t>(entity.test.rows(), 0));
  if (!a.raw) entity = mtad::preprocess(entity, mtad::PreprocessOptions{});

  const mtad::DetectorConfig config{mtad::parse_kind(a.detector), parse_param_flags(a.params), a.seed};
  const auto result = mtad::fit_and_score(config, entity);
  mtad::write_series_csv(a.out, result.scores.raw);
  std::cerr << "train " << result.train_seconds << "s, test " << result.test_seconds << "s\n";
  return 0;
}

struct EvaluateArgs {
  std::string scores, labels, strategy = "evt", out;
  mtad::ThresholdOptions threshold;
};

int cmd_evaluate(EvaluateArgs a) {
  a.threshold.strategy = mtad::parse_strategy(a.strategy);
  const auto row = mtad::evaluate_scores(a.scores, a.labels, a.threshold);
  const auto cells = mtad::row_cells(row);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (mtad::kReportColumns[i] == "train_seconds" || mtad::kReportColumns[i] == "test_seconds") continue;
    std::cout << mtad::kReportColumns[i] << ": " << cells[i] << "\n";
  }
  if (!a.out.empty()) {
    mtad::Report report;
    report.rows.push_back(row);
    std::ofstream out(a.out);
    mtad::require(out.good(), mtad::ErrorCode::io, "cannot write " + a.out);
    out << mtad::report_csv(report);
  }
  return 0;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir) {
  std::ifstream in(spec_path);
  mtad::require(in.good(), mtad::ErrorCode::io, "cannot read " + spec_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    mtad::fail(mtad::ErrorCode::parse, std::string("generator spec is not valid JSON: ") + e.what());
  }
  mtad::InjectionSpec spec;
  try {
    spec.n = j.value("n", spec.n);
    spec.m = j.value("m", spec.m);
    spec.anomaly_ratio = j.value("anomaly_ratio", spec.anomaly_ratio);
    if (j.contains("shapes")) {
      spec.shapes.clear();
      for (const auto& s : j["shapes"]) spec.shapes.insert(mtad::parse_shape(s.get<std::string>()));
    }
    mtad::require(j.contains("seed"), mtad::ErrorCode::invalid_argument, "generator spec requires 'seed'");
    spec.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    mtad::fail(mtad::ErrorCode::invalid_argument, std::string("malformed generator spec: ") + e.what());
  }
  const std::size_t entities = j.value("entities", std::size_t{1});
  const std::string prefix = j.value("entity_prefix", std::string("entity"));
  mtad::require(entities >= 1, mtad::ErrorCode::invalid_argument, "entities must be >= 1");

  const std::filesystem::path root(out_dir);
  for (std::size_t e = 0; e < entities; ++e) {
    auto entity_spec = spec;
    entity_spec.seed = spec.seed + e;
    auto entity = mtad::inject_anomalies(entity_spec);
    entity.entity_id = entities == 1 && !j.contains("entity_prefix") ? std::string("synthetic")
                                                                     : prefix + "-" + std::to_string(e + 1);
    mtad::write_entity(root / entity.entity_id, entity);
  }
  std::cerr << "wrote " << entities << " entit" << (entities == 1 ? "y" : "ies") << " to " << root.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtad: anomaly detection benchmark for multivariate KPI series"};
  app.set_version_flag("--version", std::string(mtad::kToolkitVersion));
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the benchmark described by a JSON config");
  run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "fit a detector on train rows and score test rows");
  detect->add_option("--detector", detect_args.detector, "knn | lof | pca | iforest | loda")->required();
  detect->add_option("--train", detect_args.train, "train CSV")->required()->check(CLI::ExistingFile);
  detect->add_option("--test", detect_args.test, "test CSV")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", detect_args.out, "score output, one value per line")->required();
  detect->add_option("--param", detect_args.params, "detector parameter key=value (repeatable)");
  detect->add_option("--seed", detect_args.seed, "RNG seed for iforest/loda");
  detect->add_flag("--raw", detect_args.raw, "skip constant-KPI removal and standardization");
  detect->add_flag("--ffill", detect_args.ffill, "forward-fill empty or non-finite cells");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "score an external anomaly-score series against labels");
  evaluate->add_option("--scores", eval_args.scores, "score CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--labels", eval_args.labels, "label CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--threshold-strategy", eval_args.strategy, "evt | search | fixed")
      ->check(CLI::IsMember({"evt", "search", "fixed"}));
  evaluate->add_option("--q", eval_args.threshold.risk_q, "EVT risk");
  evaluate->add_option("--init-quantile", eval_args.threshold.init_quantile, "EVT initial quantile");
  evaluate->add_option("--theta", eval_args.threshold.theta, "fixed threshold");
  evaluate->add_option("--out", eval_args.out, "optional CSV with the metric row");

  std::string gen_spec, gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset with injected anomalies");
  gen->add_option("--spec", gen_spec, "generator JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "dataset directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path);
    if (*detect) return cmd_detect(detect_args);
    if (*evaluate) return cmd_evaluate(eval_args);
    if (*gen) return cmd_gen(gen_spec, gen_out);
  } catch (const mtad::Error& e) {
    std::cerr << "mtad: " << e.what() << " [" << mtad::reason_code(e.code()) << "]\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mtad: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
