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

// Transition-probability matrices derived from a partial-correlation matrix.

#ifndef CIKP_TRANSITION_HPP_
#define CIKP_TRANSITION_HPP_

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "cikp/cigraph.hpp"
#include "cikp/matrix_io.hpp"

namespace cikp {

enum class TransitionKind { kExp, kPos, kNeg, kMaxNorm };

MatrixKind to_matrix_kind(TransitionKind kind);

struct TransitionConfig {
  double alpha = 2.0;  // scaling intensity; 0 is allowed for diagnostics
};

struct TransitionMatrix {
  Eigen::MatrixXd T;
  TransitionKind kind = TransitionKind::kExp;

  Eigen::Index dim() const { return T.rows(); }
  std::size_t zero_rows() const;
};

// Row-wise softmax of alpha * P (diagonal included, so every row carries
// self-transition mass). Strictly positive and row-stochastic.
TransitionMatrix build_exp(const Eigen::MatrixXd& P, const TransitionConfig& cfg);

// Positive entries, and negated negative entries, each row-normalized.
// Rows without qualifying entries stay all-zero. The diagonal is ignored.
std::pair<TransitionMatrix, TransitionMatrix> split_pos_neg(
    const Eigen::MatrixXd& P);

// exp(alpha P) divided by its global maximum; all entries in (0, 1].
TransitionMatrix build_maxnorm(const Eigen::MatrixXd& P,
                               const TransitionConfig& cfg);

// Wraps an externally supplied matrix; throws DataError when it violates the
// invariants of `kind`.
TransitionMatrix make_transition(Eigen::MatrixXd T, TransitionKind kind);

}  // namespace cikp

#endif  // CIKP_TRANSITION_HPP_
