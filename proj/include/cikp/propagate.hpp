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

// Knowledge propagation over a CI graph.
//
// Every node carries a distribution over C categories. Known rows are fixed
// (a delta on the observed category, or a user prior) and unknown rows are
// filled in either by iterating a diffusion update until the squared change
// drops below epsilon, or, for the exponential transition matrix, by solving
// the linear system the diffusion converges to:
//
//   (I - Pe_UU) n_U = Pe_UK n_K
//
// Any principal block Pe_UU with at least one known node removed has row
// sums bounded by some mu < 1, which makes the iteration a contraction and
// the system non-singular.

#ifndef CIKP_PROPAGATE_HPP_
#define CIKP_PROPAGATE_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cikp/dataset.hpp"
#include "cikp/transition.hpp"

namespace cikp {

struct LabelState {
  Eigen::MatrixXd n;  // D x C
  KnownMask mask;

  std::size_t num_categories() const { return static_cast<std::size_t>(n.cols()); }
};

struct KnownRow {
  std::size_t node;
  Eigen::RowVectorXd distribution;
};

// Known rows get delta(labels[node]); unknown rows the uniform 1/C. Only the
// entries of `labels` at known nodes are read.
LabelState init_state(const KnownMask& mask, std::span<const int> labels,
                      std::size_t categories);

// Known rows taken from `known_rows`, which must cover mask.known exactly.
LabelState init_state(const KnownMask& mask, std::span<const KnownRow> known_rows,
                      std::size_t categories);

enum class Regularizer { kNone, kKL, kWasserstein };

Regularizer regularizer_from_string(std::string_view name);
std::string_view to_string(Regularizer r);

struct PropagationConfig {
  double epsilon = 1e-6;  // on the squared Frobenius change
  int max_iters = 1000;
  Regularizer regularizer = Regularizer::kNone;

  void validate() const;
};

struct IterationResult {
  LabelState state;
  int iterations = 0;
  bool converged = false;
  // Per update: squared Frobenius change and largest absolute entry change.
  std::vector<double> squared_changes;
  std::vector<double> max_changes;
  // Unknown nodes whose update had no contributing term (zero transition
  // rows); such nodes keep their initial row.
  std::size_t stalled_nodes = 0;
};

IterationResult iterate_exp(const TransitionMatrix& pe, const LabelState& state,
                            const PropagationConfig& cfg);

// Positive diffusion plus regularizers against the initial unknown rows:
//   n_U <- P+ n + R(n0_U, P+ n) + R(n0_U, P- n)
// then clamped at zero and row-renormalized.
IterationResult iterate_posneg(const TransitionMatrix& ppos,
                               const TransitionMatrix& pneg,
                               const LabelState& state,
                               const PropagationConfig& cfg);

// iterate_posneg without the P- terms.
IterationResult iterate_pos(const TransitionMatrix& ppos, const LabelState& state,
                            const PropagationConfig& cfg);

struct AnalyticalDiagnostics {
  double mu = 0.0;  // max row sum of Pe_UU, upper bound on its spectral radius
  double solve_residual = 0.0;
  // Iterations the diffusion would need for mu^t to fall below 1e-12.
  double iterations_equivalent = 0.0;
};

struct AnalyticalResult {
  LabelState state;
  AnalyticalDiagnostics diagnostics;
};

AnalyticalResult analytical(const TransitionMatrix& pe, const LabelState& state);

// Element-wise contribution matrix, same shape as q:
//   KL:          n0 * ln(n0 / q)               (0 where n0 == 0)
//   Wasserstein: |CDF(n0)(c) - CDF(q)(c)|      over ordered category indices
// q is clamped below at 1e-12.
Eigen::MatrixXd regularizer_term(const Eigen::MatrixXd& n0, const Eigen::MatrixXd& q,
                                 Regularizer kind);

enum class SelectionMode { kArgmax, kConfidenceThreshold };

struct SelectionStrategy {
  SelectionMode mode = SelectionMode::kArgmax;
  double threshold = 0.0;
};

struct Prediction {
  std::size_t node = 0;
  int category = -1;  // -1 when abstaining
  double confidence = 0.0;  // max softmax probability

  bool abstained() const { return category < 0; }
};

// One prediction per unknown node, in mask.unknown order. Ties go to the
// lowest category index.
std::vector<Prediction> select(const LabelState& state,
                               const SelectionStrategy& strategy);

Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& row);
double max_row_sum(const Eigen::MatrixXd& m);

enum class PropagationMethod {
  kIterativeExp,
  kIterativePos,
  kIterativePosNeg,
  kAnalyticalExp,
};

struct KnowPropConfig {
  PropagationMethod method = PropagationMethod::kAnalyticalExp;
  TransitionConfig transition;
  PropagationConfig propagation;
};

struct KnowPropResult {
  LabelState state;
  int iterations = 0;
  bool converged = true;
  double mu = 0.0;  // only for exponential transitions
  double solve_residual = 0.0;
  std::size_t zero_rows_pos = 0;
  std::size_t zero_rows_neg = 0;
  std::size_t stalled_nodes = 0;
};

// Builds the transition matrices the method needs from P and runs it.
KnowPropResult knowprop(const Eigen::MatrixXd& P, const LabelState& initial,
                        const KnowPropConfig& cfg);

}  // namespace cikp

#endif  // CIKP_PROPAGATE_HPP_
