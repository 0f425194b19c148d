// Copyright 2026 The CIKP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cikp/cigraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cikp/error.hpp"

namespace cikp {
namespace {

// Average ranks (1-based), ties share the mean of their positions.
Eigen::VectorXd ranks(const Eigen::VectorXd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v(a) < v(b); });
  Eigen::VectorXd r(v.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v(order[j + 1]) == v(order[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r(order[k]) = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

CorrelationMode correlation_mode_from_string(std::string_view name) {
  if (name == "pearson") return CorrelationMode::kPearson;
  if (name == "spearman") return CorrelationMode::kSpearman;
  throw UsageError("unknown correlation mode '" + std::string(name) + "'");
}

CovarianceMatrix covariance(const Eigen::MatrixXd& X, CorrelationMode mode) {
  if (X.rows() < 2) {
    throw UsageError("correlation needs at least 2 samples, got " +
                     std::to_string(X.rows()));
  }
  Eigen::MatrixXd data = X;
  if (mode == CorrelationMode::kSpearman) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) data.col(j) = ranks(X.col(j));
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  const Eigen::VectorXd norms = data.colwise().norm().transpose();
  const double scale = norms.size() > 0 ? norms.maxCoeff() : 0.0;

  const Eigen::Index d = data.cols();
  Eigen::VectorXd inv(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    // Relative test so that floating-point residue of a constant column
    // does not masquerade as variance.
    inv(j) = norms(j) > 1e-12 * std::max(scale, 1.0) ? 1.0 / norms(j) : 0.0;
  }
  CovarianceMatrix out;
  out.S.noalias() = data.transpose() * data;
  out.S = inv.asDiagonal() * out.S * inv.asDiagonal();
  out.S = 0.5 * (out.S + out.S.transpose()).eval();
  out.S = out.S.cwiseMax(-1.0).cwiseMin(1.0);
  out.S.diagonal().setOnes();
  return out;
}

CovarianceMatrix shrink(const CovarianceMatrix& S, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw UsageError("shrinkage lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  CovarianceMatrix out;
  out.S = (1.0 - lambda) * S.S;
  out.S.diagonal().array() += lambda;
  out.shrinkage = lambda;
  return out;
}

PrecisionMatrix precision(const CovarianceMatrix& S) {
  if (S.S.rows() != S.S.cols()) throw UsageError("covariance matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(S.S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "covariance matrix is not positive definite; apply shrinkage (lambda > 0)");
  }
  PrecisionMatrix out;
  out.theta = llt.solve(Eigen::MatrixXd::Identity(S.S.rows(), S.S.cols()));
  out.theta = 0.5 * (out.theta + out.theta.transpose()).eval();
  if (!out.theta.allFinite() || (out.theta.diagonal().array() <= 0.0).any()) {
    throw NumericalError("precision matrix is degenerate; increase shrinkage");
  }
  return out;
}

PartialCorrelationMatrix partial_correlation(const CovarianceMatrix& S,
                                             double sparsity_threshold) {
  if (sparsity_threshold < 0.0) throw UsageError("sparsity threshold must be >= 0");
  const PrecisionMatrix prec = precision(S);
  const Eigen::VectorXd inv_sqrt = prec.theta.diagonal().array().rsqrt();
  PartialCorrelationMatrix out;
  out.P = -(inv_sqrt.asDiagonal() * prec.theta * inv_sqrt.asDiagonal());
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.P.diagonal().setZero();
  if (sparsity_threshold > 0.0) {
    out.P = (out.P.array().abs() < sparsity_threshold).select(0.0, out.P);
  }
  return out;
}

PartialCorrelationMatrix recover(const Eigen::MatrixXd& X, const RecoveryConfig& cfg) {
  return partial_correlation(shrink(covariance(X, cfg.correlation), cfg.shrinkage),
                             cfg.sparsity_threshold);
}

void validate_partial_correlation(const Eigen::MatrixXd& P, double tol) {
  if (P.rows() != P.cols()) throw DataError("partial-correlation matrix must be square");
  if (P.size() == 0) throw DataError("partial-correlation matrix is empty");
  if (!P.allFinite()) throw DataError("partial-correlation matrix has non-finite entries");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw DataError("partial-correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (P(i, i) != 0.0) throw DataError("partial-correlation diagonal must be zero");
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (i != j && !(std::abs(P(i, j)) < 1.0)) {
        throw DataError("partial correlation outside (-1, 1) at (" + std::to_string(i) +
                        ", " + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace cikp
