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
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include <unistd.h>

#include "mtad/data.hpp"
#include "mtad/metrics.hpp"

namespace mtad {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("mtad_data_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::io;
}

TEST(Load, WellFormedEntity) {
  TempDir dir;
  const auto e = dir.path() / "machine-1";
  fs::create_directories(e);
  write_text(e / "train.csv", "1,2\n3,4\n5,6\n");
  write_text(e / "test.csv", "1,2\n3,4.5\n-5e-1,6\n");
  write_text(e / "test_label.csv", "0\n1\n0\n");
  const auto entity = load_entity(e);
  EXPECT_EQ(entity.entity_id, "machine-1");
  EXPECT_EQ(entity.test.rows(), 3u);
  EXPECT_EQ(entity.test.cols(), 2u);
  EXPECT_EQ(entity.test(2, 0), -0.5);
  EXPECT_EQ(entity.test_labels.values(), (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(Load, Errors) {
  TempDir dir;
  const auto e = dir.path() / "x";
  fs::create_directories(e);
  write_text(e / "train.csv", "1,2\n3,4\n5,6\n");
  write_text(e / "test.csv", "1,2\n3,4\n5,6\n");
  write_text(e / "test_label.csv", "0\n2\n0\n");
  EXPECT_EQ(code_of([&] { load_entity(e); }), ErrorCode::invalid_label);

  write_text(e / "test_label.csv", "0\n1\n0\n");
  write_text(e / "train.csv", "1,2,3,4\n3,4,5,6\n");
  EXPECT_EQ(code_of([&] { load_entity(e); }), ErrorCode::dimension_mismatch);

  write_text(e / "train.csv", "1,2\n3,abc\n");
  EXPECT_EQ(code_of([&] { load_entity(e); }), ErrorCode::parse);

  write_text(e / "train.csv", "1,2\n3,nan\n");
  EXPECT_EQ(code_of([&] { load_entity(e); }), ErrorCode::non_finite);
  const auto filled = load_entity(e, LoadOptions{true});
  EXPECT_EQ(filled.train(1, 1), 2.0);

  write_text(e / "test_label.csv", "0\n1\n");
  EXPECT_EQ(code_of([&] { load_entity(e, LoadOptions{true}); }), ErrorCode::length_mismatch);

  write_text(e / "train.csv", "1,2\n3,4\n");
  fs::remove(e / "test.csv");
  EXPECT_EQ(code_of([&] { load_entity(e); }), ErrorCode::io);
}

TEST(Load, ForwardFillFirstRowFallsBackToZero) {
  TempDir dir;
  write_text(dir.path() / "m.csv", ",1\n2,\ninf,3\n");
  const auto m = read_matrix_csv(dir.path() / "m.csv", LoadOptions{true});
  EXPECT_EQ(std::vector<double>(m.values().begin(), m.values().end()), (std::vector<double>{0, 1, 2, 1, 2, 3}));
}

TEST(Load, RoundTripIsBitExact) {
  TempDir dir;
  const auto entity = inject_anomalies({300, 4, 0.05, {AnomalyShape::spike, AnomalyShape::level_shift}, 3});
  write_entity(dir.path() / "ds" / "synthetic", entity);
  const auto back = load_entity(dir.path() / "ds" / "synthetic");
  EXPECT_EQ(back.train, entity.train);
  EXPECT_EQ(back.test, entity.test);
  EXPECT_EQ(back.test_labels.values(), entity.test_labels.values());
  const auto ds = load_dataset(dir.path() / "ds");
  EXPECT_EQ(ds.name, "ds");
  ASSERT_EQ(ds.entities.size(), 1u);
}

TEST(Load, DatasetOrderIsLexicographic) {
  TempDir dir;
  for (const char* id : {"b", "a", "c"}) {
    auto e = inject_anomalies({50, 2, 0.1, {AnomalyShape::spike}, 1});
    e.entity_id = id;
    write_entity(dir.path() / id, e);
  }
  const auto ds = load_dataset(dir.path());
  ASSERT_EQ(ds.entities.size(), 3u);
  EXPECT_EQ(ds.entities[0].entity_id, "a");
  EXPECT_EQ(ds.entities[2].entity_id, "c");
}

LabeledEntity two_column_entity(std::vector<double> a, std::vector<double> b) {
  std::vector<double> v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    v.push_back(a[i]);
    v.push_back(b[i]);
  }
  const std::size_t n = a.size();
  return {"e", KpiMatrix(n, 2, v), KpiMatrix(n, 2, v), LabelVector(std::vector<std::uint8_t>(n, 0))};
}

TEST(Preprocess, DropConstant) {
  const auto e = two_column_entity({1, 2, 3}, {5, 5, 5});
  const auto [out, kept] = drop_constant_kpis(e);
  EXPECT_EQ(out.train.cols(), 1u);
  EXPECT_EQ(kept, (std::vector<std::size_t>{0}));
  EXPECT_EQ(drop_constant_kpis(out).first.train, out.train);

  const auto varying = two_column_entity({1, 2, 3}, {1, 0, 1});
  EXPECT_EQ(drop_constant_kpis(varying).second, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(drop_constant_kpis(varying).first.train, varying.train);
  EXPECT_EQ(code_of([&] { drop_constant_kpis(two_column_entity({1, 1}, {2, 2})); }),
            ErrorCode::no_informative_kpis);
}

TEST(Preprocess, Standardize) {
  // Mean 5, population std 2.
  auto e = two_column_entity({3, 7, 3, 7}, {0, 1, 2, 3});
  e.test = KpiMatrix::from_rows({{9, 0}});
  e.test_labels = LabelVector{0};
  const auto [out, stats] = standardize(e);
  EXPECT_DOUBLE_EQ(stats[0].mean, 5.0);
  EXPECT_DOUBLE_EQ(stats[0].std, 2.0);
  EXPECT_DOUBLE_EQ(out.test(0, 0), 2.0);
  const auto col = out.train.column(0);
  EXPECT_NEAR(std::accumulate(col.begin(), col.end(), 0.0), 0.0, 1e-12);
  const auto again = standardize(out).first;
  for (std::size_t i = 0; i < out.train.rows(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(again.train(i, j), out.train(i, j), 1e-12);
  }
  EXPECT_EQ(code_of([&] { standardize(two_column_entity({1, 1}, {1, 2})); }), ErrorCode::zero_variance);
}

TEST(Preprocess, StandardizedStatsProperty) {
  const auto e = preprocess(inject_anomalies({500, 6, 0.05, {AnomalyShape::spike}, 5}), {});
  for (std::size_t j = 0; j < e.train.cols(); ++j) {
    const auto c = e.train.column(j);
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
    double var = 0.0;
    for (double v : c) var += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_LT(std::abs(std::sqrt(var / static_cast<double>(c.size())) - 1.0), 1e-9);
  }
}

TEST(Inject, Deterministic) {
  const InjectionSpec spec{2000, 8, 0.05, {AnomalyShape::spike}, 7};
  const auto a = inject_anomalies(spec);
  const auto b = inject_anomalies(spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.test_labels.values(), b.test_labels.values());
  auto other = spec;
  other.seed = 8;
  EXPECT_NE(inject_anomalies(other).test, a.test);
}

TEST(Inject, LabelsMatchPlannedEvents) {
  const std::vector<std::set<AnomalyShape>> shape_sets{
      {AnomalyShape::spike},
      {AnomalyShape::level_shift},
      {AnomalyShape::long_segment},
      {AnomalyShape::spike, AnomalyShape::level_shift},
      {AnomalyShape::spike, AnomalyShape::level_shift, AnomalyShape::long_segment}};
  for (const auto& shapes : shape_sets) {
    for (double ratio : {0.01, 0.05, 0.1, 0.3}) {
      const InjectionSpec spec{1000, 5, ratio, shapes, 11};
      const auto e = inject_anomalies(spec);
      std::vector<std::size_t> planned;
      for (const auto& [shape, len] : detail::plan_events(spec)) planned.push_back(len);
      std::vector<std::size_t> found;
      for (const auto& s : extract_segments(e.test_labels)) found.push_back(s.length());
      std::sort(planned.begin(), planned.end());
      std::sort(found.begin(), found.end());
      EXPECT_EQ(found, planned);
      const double realized = static_cast<double>(e.test_labels.positives()) / 1000.0;
      EXPECT_NEAR(realized, ratio, 0.2 * ratio);
      if (shapes.count(AnomalyShape::long_segment)) {
        EXPECT_GE(static_cast<double>(found.back()), 0.5 * 1000.0 * ratio);
      }
    }
  }
}

TEST(Inject, RejectsTooFewAnomalies) {
  EXPECT_EQ(code_of([] { inject_anomalies({100, 2, 0.005, {AnomalyShape::spike}, 1}); }), ErrorCode::invalid_argument);
}

}  // namespace
}  // namespace mtad
