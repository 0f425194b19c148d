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

// Conditional-independence graph recovery by covariance shrinkage and
// inversion. This is the minimal recovery needed to run experiments end to
// end; any external recovery tool can supply a partial-correlation matrix
// through the matrix container instead.

#ifndef CIKP_CIGRAPH_HPP_
#define CIKP_CIGRAPH_HPP_

#include <string_view>

#include <Eigen/Dense>

namespace cikp {

enum class CorrelationMode { kPearson, kSpearman };

CorrelationMode correlation_mode_from_string(std::string_view name);

struct CovarianceMatrix {
  Eigen::MatrixXd S;
  double shrinkage = 0.0;
};

struct PrecisionMatrix {
  Eigen::MatrixXd theta;
};

// Symmetric, zero diagonal, off-diagonal entries in (-1, 1).
struct PartialCorrelationMatrix {
  Eigen::MatrixXd P;

  Eigen::Index dim() const { return P.rows(); }
};

// Sample correlation between the columns of X (M x D). Columns with zero
// variance get correlation 0 with every other column and 1 on the diagonal.
// Throws UsageError when M < 2.
CovarianceMatrix covariance(const Eigen::MatrixXd& X, CorrelationMode mode);

// (1 - lambda) S + lambda I. Throws UsageError for lambda outside [0, 1].
CovarianceMatrix shrink(const CovarianceMatrix& S, double lambda);

// Inverse by Cholesky; throws NumericalError when S is not positive
// definite.
PrecisionMatrix precision(const CovarianceMatrix& S);

// P_ij = -theta_ij / sqrt(theta_ii theta_jj), diagonal zeroed. Entries with
// |P_ij| < sparsity_threshold are set to 0.
PartialCorrelationMatrix partial_correlation(const CovarianceMatrix& S,
                                             double sparsity_threshold = 0.0);

struct RecoveryConfig {
  CorrelationMode correlation = CorrelationMode::kPearson;
  double shrinkage = 0.1;
  double sparsity_threshold = 0.0;
};

PartialCorrelationMatrix recover(const Eigen::MatrixXd& X,
                                 const RecoveryConfig& cfg);

// Throws DataError unless P is square, finite, symmetric within `tol`, has a
// zero diagonal and off-diagonal entries strictly inside (-1, 1).
void validate_partial_correlation(const Eigen::MatrixXd& P, double tol = 1e-9);

}  // namespace cikp

#endif  // CIKP_CIGRAPH_HPP_
