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
#include <vector>

#include <Eigen/Dense>

#include "mtad/error.hpp"
#include "mtad/types.hpp"

namespace mtad::detectors {

struct PcaParams {
  double eps = 1e-9;
};

// Sum of squared projections on every eigenvector of the train covariance,
// each divided by (eigenvalue + eps). Minor components dominate, so points
// off the normal subspace get large scores. With a full-rank covariance this
// is the Mahalanobis distance (squared).
class PcaModel {
 public:
  static PcaModel fit(const KpiMatrix& train, const PcaParams& params) {
    require(train.rows() >= 2, ErrorCode::invalid_argument, "pca: need at least 2 train rows");
    require(params.eps > 0.0 && std::isfinite(params.eps), ErrorCode::invalid_argument,
            "pca: eps must be positive");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> x(train.values().data(), static_cast<Eigen::Index>(train.rows()),
                                       static_cast<Eigen::Index>(train.cols()));
    PcaModel model;
    model.mean_ = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - model.mean_.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(train.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    require(solver.info() == Eigen::Success, ErrorCode::detector_failed, "pca: eigendecomposition failed");
    model.eigenvectors_ = solver.eigenvectors();
    model.weights_ = solver.eigenvalues().unaryExpr(
        [eps = params.eps](double lambda) { return 1.0 / (std::max(lambda, 0.0) + eps); });
    return model;
  }

  std::vector<double> score(const KpiMatrix& test) const {
    require(test.cols() == static_cast<std::size_t>(mean_.size()), ErrorCode::dimension_mismatch,
            "pca: dimension mismatch");
    std::vector<double> scores(test.rows());
    Eigen::VectorXd centered(mean_.size());
    for (std::size_t i = 0; i < test.rows(); ++i) {
      const auto row = test.row(i);
      for (Eigen::Index j = 0; j < mean_.size(); ++j) centered[j] = row[static_cast<std::size_t>(j)] - mean_[j];
      const Eigen::VectorXd projected = eigenvectors_.transpose() * centered;
      scores[i] = projected.cwiseAbs2().dot(weights_);
    }
    return scores;
  }

  const Eigen::VectorXd& mean() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd weights_;
};

inline ScoreSeries pca_score(const KpiMatrix& train, const KpiMatrix& test, double eps) {
  return {PcaModel::fit(train, {eps}).score(test), std::nullopt};
}

}  // namespace mtad::detectors
