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

#include "cikp/transition.hpp"

#include <cmath>
#include <string>

#include "cikp/error.hpp"

namespace cikp {
namespace {

constexpr double kRowSumTol = 1e-9;

void check_input(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols()) throw UsageError("transition input must be square");
  if (!P.allFinite()) throw UsageError("transition input has non-finite entries");
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw UsageError("alpha must be a finite value >= 0");
  }
}

// Row-normalizes in place; all-zero rows stay zero.
void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0) m.row(i) /= s;
  }
}

}  // namespace

MatrixKind to_matrix_kind(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::kExp: return MatrixKind::kExp;
    case TransitionKind::kPos: return MatrixKind::kPos;
    case TransitionKind::kNeg: return MatrixKind::kNeg;
    case TransitionKind::kMaxNorm: return MatrixKind::kMaxNorm;
  }
  return MatrixKind::kGeneric;
}

std::size_t TransitionMatrix::zero_rows() const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    if ((T.row(i).array() == 0.0).all()) ++count;
  }
  return count;
}

TransitionMatrix build_exp(const Eigen::MatrixXd& P, const TransitionConfig& cfg) {
  check_input(P);
  check_alpha(cfg.alpha);
  TransitionMatrix out;
  out.kind = TransitionKind::kExp;
  out.T = cfg.alpha * P;
  for (Eigen::Index i = 0; i < out.T.rows(); ++i) {
    auto row = out.T.row(i);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return out;
}

std::pair<TransitionMatrix, TransitionMatrix> split_pos_neg(const Eigen::MatrixXd& P) {
  check_input(P);
  TransitionMatrix pos;
  TransitionMatrix neg;
  pos.kind = TransitionKind::kPos;
  neg.kind = TransitionKind::kNeg;
  pos.T = P.cwiseMax(0.0);
  neg.T = (-P).cwiseMax(0.0);
  pos.T.diagonal().setZero();
  neg.T.diagonal().setZero();
  normalize_rows(pos.T);
  normalize_rows(neg.T);
  return {std::move(pos), std::move(neg)};
}

TransitionMatrix build_maxnorm(const Eigen::MatrixXd& P, const TransitionConfig& cfg) {
  check_input(P);
  check_alpha(cfg.alpha);
  TransitionMatrix out;
  out.kind = TransitionKind::kMaxNorm;
  out.T = cfg.alpha * P;
  if (out.T.size() > 0) out.T = (out.T.array() - out.T.maxCoeff()).exp();
  return out;
}

TransitionMatrix make_transition(Eigen::MatrixXd T, TransitionKind kind) {
  if (T.rows() != T.cols()) throw DataError("transition matrix must be square");
  if (!T.allFinite() || (T.array() < 0.0).any()) {
    throw DataError("transition matrix entries must be finite and nonnegative");
  }
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    const double s = T.row(i).sum();
    switch (kind) {
      case TransitionKind::kExp:
        if (std::abs(s - 1.0) > kRowSumTol || (T.row(i).array() <= 0.0).any()) {
          throw DataError("exp transition row " + std::to_string(i) +
                          " is not strictly positive and stochastic");
        }
        break;
      case TransitionKind::kPos:
      case TransitionKind::kNeg:
        if (s != 0.0 && std::abs(s - 1.0) > kRowSumTol) {
          throw DataError("transition row " + std::to_string(i) +
                          " neither sums to 1 nor is all-zero");
        }
        if (T(i, i) != 0.0) throw DataError("pos/neg transition diagonal must be zero");
        break;
      case TransitionKind::kMaxNorm:
        if ((T.row(i).array() <= 0.0).any() || (T.row(i).array() > 1.0).any()) {
          throw DataError("maxnorm entries must lie in (0, 1]");
        }
        break;
    }
  }
  if (kind == TransitionKind::kMaxNorm && T.size() > 0 && T.maxCoeff() != 1.0) {
    throw DataError("maxnorm matrix maximum must equal 1");
  }
  TransitionMatrix out;
  out.T = std::move(T);
  out.kind = kind;
  return out;
}

}  // namespace cikp
