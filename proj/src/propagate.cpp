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

#include "cikp/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cikp/error.hpp"

namespace cikp {
namespace {

using Index = Eigen::Index;
using IndexList = std::vector<Index>;

constexpr double kProbFloor = 1e-12;
constexpr double kDistTol = 1e-9;

IndexList to_index(const std::vector<std::size_t>& v) {
  return IndexList(v.begin(), v.end());
}

void check_state(const LabelState& state) {
  const auto d = static_cast<Index>(state.mask.size());
  if (state.n.rows() != d) {
    throw UsageError("label state has " + std::to_string(state.n.rows()) +
                     " rows for a mask over " + std::to_string(d) + " nodes");
  }
  if (state.n.cols() < 1) throw UsageError("label state needs at least one category");
}

void check_transition(const TransitionMatrix& t, const LabelState& state,
                      TransitionKind expected, const char* what) {
  if (t.kind != expected) throw UsageError(std::string(what) + ": wrong transition kind");
  if (t.T.rows() != state.n.rows() || t.T.cols() != state.n.rows()) {
    throw UsageError(std::string(what) + ": transition matrix is " +
                     std::to_string(t.T.rows()) + "x" + std::to_string(t.T.cols()) +
                     ", label state has " + std::to_string(state.n.rows()) + " nodes");
  }
}

void require_known(const KnownMask& mask) {
  if (mask.known.empty()) {
    throw UsageError(
        "no known nodes: propagation requires every connected component to have a label");
  }
}

Eigen::RowVectorXd delta(int category, std::size_t categories) {
  if (category < 0 || static_cast<std::size_t>(category) >= categories) {
    throw UsageError("label " + std::to_string(category) + " outside 0.." +
                     std::to_string(categories - 1));
  }
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Index>(categories));
  row(category) = 1.0;
  return row;
}

bool is_zero_row(const Eigen::MatrixXd& m, Index i) {
  return (m.row(i).array() == 0.0).all();
}

// Shared driver for the positive/negative split updates. `pneg` may be null.
IterationResult run_split(const TransitionMatrix& ppos, const TransitionMatrix* pneg,
                          const LabelState& state, const PropagationConfig& cfg) {
  cfg.validate();
  check_state(state);
  check_transition(ppos, state, TransitionKind::kPos, "iterate_pos");
  if (pneg) check_transition(*pneg, state, TransitionKind::kNeg, "iterate_posneg");

  IterationResult result;
  result.state = state;
  if (state.mask.unknown.empty()) {
    result.converged = true;
    return result;
  }
  require_known(state.mask);

  const IndexList unknown = to_index(state.mask.unknown);
  const auto nu = static_cast<Index>(unknown.size());
  const Eigen::MatrixXd pos_u = ppos.T(unknown, Eigen::all);
  Eigen::MatrixXd neg_u;
  if (pneg) neg_u = pneg->T(unknown, Eigen::all);
  const Eigen::MatrixXd n0_u = state.n(unknown, Eigen::all);
  const bool regularized = cfg.regularizer != Regularizer::kNone;

  std::vector<bool> pos_active(static_cast<std::size_t>(nu));
  std::vector<bool> neg_active(static_cast<std::size_t>(nu), false);
  for (Index i = 0; i < nu; ++i) {
    pos_active[static_cast<std::size_t>(i)] = !is_zero_row(pos_u, i);
    if (pneg) neg_active[static_cast<std::size_t>(i)] = !is_zero_row(neg_u, i);
  }
  std::vector<bool> stalled(static_cast<std::size_t>(nu), false);

  Eigen::MatrixXd& n = result.state.n;
  const auto c = n.cols();
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const Eigen::MatrixXd q_pos = pos_u * n;
    Eigen::MatrixXd update = Eigen::MatrixXd::Zero(nu, c);
    Eigen::MatrixXd r_pos;
    Eigen::MatrixXd r_neg;
    if (regularized) r_pos = regularizer_term(n0_u, q_pos, cfg.regularizer);
    if (pneg && regularized) {
      const Eigen::MatrixXd q_neg = neg_u * n;
      r_neg = regularizer_term(n0_u, q_neg, cfg.regularizer);
    }
    for (Index i = 0; i < nu; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (pos_active[k]) {
        update.row(i) += q_pos.row(i);
        if (regularized) update.row(i) += r_pos.row(i);
      }
      if (neg_active[k] && regularized) update.row(i) += r_neg.row(i);
    }

    update = update.cwiseMax(0.0);
    double sq = 0.0;
    double mx = 0.0;
    for (Index i = 0; i < nu; ++i) {
      const Index node = unknown[static_cast<std::size_t>(i)];
      const double s = update.row(i).sum();
      if (!(s > 0.0) || !std::isfinite(s)) {
        stalled[static_cast<std::size_t>(i)] = true;
        continue;  // keeps the previous row
      }
      const Eigen::RowVectorXd next = update.row(i) / s;
      const Eigen::RowVectorXd diff = next - n.row(node);
      sq += diff.squaredNorm();
      mx = std::max(mx, diff.cwiseAbs().maxCoeff());
      n.row(node) = next;
    }
    result.squared_changes.push_back(sq);
    result.max_changes.push_back(mx);
    result.iterations = t;
    if (sq <= cfg.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.stalled_nodes =
      static_cast<std::size_t>(std::count(stalled.begin(), stalled.end(), true));
  return result;
}

}  // namespace

LabelState init_state(const KnownMask& mask, std::span<const int> labels,
                      std::size_t categories) {
  if (labels.size() != mask.size()) {
    throw UsageError("labels must have one entry per node");
  }
  std::vector<KnownRow> rows;
  rows.reserve(mask.known.size());
  for (std::size_t k : mask.known) rows.push_back({k, delta(labels[k], categories)});
  return init_state(mask, rows, categories);
}

LabelState init_state(const KnownMask& mask, std::span<const KnownRow> known_rows,
                      std::size_t categories) {
  if (categories < 1) throw UsageError("need at least one category");
  require_known(mask);
  const auto d = static_cast<Index>(mask.size());
  const auto c = static_cast<Index>(categories);
  LabelState state;
  state.mask = mask;
  state.n = Eigen::MatrixXd::Constant(d, c, 1.0 / static_cast<double>(categories));

  const auto flags = mask.is_known();
  std::vector<bool> filled(static_cast<std::size_t>(d), false);
  for (const auto& row : known_rows) {
    if (row.node >= mask.size() || !flags[row.node]) {
      throw UsageError("distribution given for node " + std::to_string(row.node) +
                       ", which is not known");
    }
    if (filled[row.node]) {
      throw UsageError("duplicate distribution for node " + std::to_string(row.node));
    }
    if (row.distribution.size() != c) {
      throw UsageError("distribution for node " + std::to_string(row.node) +
                       " has the wrong number of categories");
    }
    if (!row.distribution.allFinite() || (row.distribution.array() < 0.0).any() ||
        std::abs(row.distribution.sum() - 1.0) > kDistTol) {
      throw UsageError("distribution for node " + std::to_string(row.node) +
                       " is not a probability distribution");
    }
    state.n.row(static_cast<Index>(row.node)) = row.distribution;
    filled[row.node] = true;
  }
  for (std::size_t k : mask.known) {
    if (!filled[k]) throw UsageError("known node " + std::to_string(k) + " has no distribution");
  }
  return state;
}

Regularizer regularizer_from_string(std::string_view name) {
  if (name == "none") return Regularizer::kNone;
  if (name == "kl") return Regularizer::kKL;
  if (name == "wasserstein") return Regularizer::kWasserstein;
  throw UsageError("unknown regularizer '" + std::string(name) + "'");
}

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::kNone: return "none";
    case Regularizer::kKL: return "kl";
    case Regularizer::kWasserstein: return "wasserstein";
  }
  return "none";
}

void PropagationConfig::validate() const {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (max_iters < 1) throw UsageError("max_iters must be at least 1");
}

IterationResult iterate_exp(const TransitionMatrix& pe, const LabelState& state,
                            const PropagationConfig& cfg) {
  cfg.validate();
  check_state(state);
  check_transition(pe, state, TransitionKind::kExp, "iterate_exp");

  IterationResult result;
  result.state = state;
  if (state.mask.unknown.empty()) {
    result.converged = true;
    return result;
  }
  require_known(state.mask);

  const IndexList unknown = to_index(state.mask.unknown);
  const Eigen::MatrixXd p_u = pe.T(unknown, Eigen::all);
  Eigen::MatrixXd& n = result.state.n;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const Eigen::MatrixXd next = p_u * n;
    const Eigen::MatrixXd diff = next - n(unknown, Eigen::all);
    const double sq = diff.squaredNorm();
    result.squared_changes.push_back(sq);
    result.max_changes.push_back(diff.cwiseAbs().maxCoeff());
    n(unknown, Eigen::all) = next;
    result.iterations = t;
    if (sq <= cfg.epsilon) {
      result.converged = true;
      break;
    }
  }
  return result;
}

IterationResult iterate_posneg(const TransitionMatrix& ppos, const TransitionMatrix& pneg,
                               const LabelState& state, const PropagationConfig& cfg) {
  return run_split(ppos, &pneg, state, cfg);
}

IterationResult iterate_pos(const TransitionMatrix& ppos, const LabelState& state,
                            const PropagationConfig& cfg) {
  return run_split(ppos, nullptr, state, cfg);
}

AnalyticalResult analytical(const TransitionMatrix& pe, const LabelState& state) {
  check_state(state);
  check_transition(pe, state, TransitionKind::kExp, "analytical");
  AnalyticalResult result;
  result.state = state;
  if (state.mask.unknown.empty()) return result;
  require_known(state.mask);

  const IndexList unknown = to_index(state.mask.unknown);
  const IndexList known = to_index(state.mask.known);
  const Eigen::MatrixXd a = pe.T(unknown, unknown);
  const Eigen::MatrixXd rhs = pe.T(unknown, known) * state.n(known, Eigen::all);

  const double mu = max_row_sum(a);
  if (!(mu < 1.0)) {
    throw NumericalError("row sums of the unknown block reach " + std::to_string(mu) +
                         "; the transition matrix is not strictly positive");
  }
  Eigen::MatrixXd system = -a;
  system.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const Eigen::MatrixXd n_u = lu.solve(rhs);
  if (!n_u.allFinite()) throw NumericalError("linear solve produced non-finite values");

  result.state.n(unknown, Eigen::all) = n_u;
  result.diagnostics.mu = mu;
  result.diagnostics.solve_residual = (system * n_u - rhs).norm();
  result.diagnostics.iterations_equivalent =
      mu > 0.0 ? std::ceil(std::log(1e-12) / std::log(mu)) : 1.0;
  return result;
}

Eigen::MatrixXd regularizer_term(const Eigen::MatrixXd& n0, const Eigen::MatrixXd& q,
                                 Regularizer kind) {
  if (n0.rows() != q.rows() || n0.cols() != q.cols()) {
    throw UsageError("regularizer operands differ in shape");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  switch (kind) {
    case Regularizer::kNone:
      break;
    case Regularizer::kKL: {
      const Eigen::MatrixXd qc = q.cwiseMax(kProbFloor);
      for (Index i = 0; i < q.rows(); ++i) {
        for (Index c = 0; c < q.cols(); ++c) {
          const double p = n0(i, c);
          if (p > 0.0) out(i, c) = p * std::log(p / qc(i, c));
        }
      }
      break;
    }
    case Regularizer::kWasserstein: {
      const Eigen::MatrixXd qc = q.cwiseMax(kProbFloor);
      for (Index i = 0; i < q.rows(); ++i) {
        double cdf_p = 0.0;
        double cdf_q = 0.0;
        for (Index c = 0; c < q.cols(); ++c) {
          cdf_p += n0(i, c);
          cdf_q += qc(i, c);
          out(i, c) = std::abs(cdf_p - cdf_q);
        }
      }
      break;
    }
  }
  return out;
}

Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& row) {
  Eigen::RowVectorXd e = (row.array() - row.maxCoeff()).exp();
  return e / e.sum();
}

double max_row_sum(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  return m.rowwise().sum().maxCoeff();
}

std::vector<Prediction> select(const LabelState& state, const SelectionStrategy& strategy) {
  check_state(state);
  const auto c = state.n.cols();
  if (strategy.mode == SelectionMode::kConfidenceThreshold) {
    const double lo = 1.0 / static_cast<double>(c);
    if (!(strategy.threshold >= lo - 1e-12 && strategy.threshold <= 1.0)) {
      throw UsageError("confidence threshold must lie in [1/C, 1]");
    }
  }
  std::vector<Prediction> out;
  out.reserve(state.mask.unknown.size());
  for (std::size_t node : state.mask.unknown) {
    const Eigen::RowVectorXd p = softmax(state.n.row(static_cast<Index>(node)));
    Index best = 0;
    for (Index k = 1; k < c; ++k) {
      if (p(k) > p(best)) best = k;
    }
    Prediction pred;
    pred.node = node;
    pred.confidence = p(best);
    const bool accept = strategy.mode == SelectionMode::kArgmax ||
                        pred.confidence >= strategy.threshold - 1e-12;
    pred.category = accept ? static_cast<int>(best) : -1;
    out.push_back(pred);
  }
  return out;
}

KnowPropResult knowprop(const Eigen::MatrixXd& P, const LabelState& initial,
                        const KnowPropConfig& cfg) {
  KnowPropResult out;
  switch (cfg.method) {
    case PropagationMethod::kIterativeExp: {
      const auto pe = build_exp(P, cfg.transition);
      auto r = iterate_exp(pe, initial, cfg.propagation);
      const IndexList unknown = to_index(initial.mask.unknown);
      out.mu = max_row_sum(pe.T(unknown, unknown));
      out.state = std::move(r.state);
      out.iterations = r.iterations;
      out.converged = r.converged;
      break;
    }
    case PropagationMethod::kAnalyticalExp: {
      auto r = analytical(build_exp(P, cfg.transition), initial);
      out.state = std::move(r.state);
      out.mu = r.diagnostics.mu;
      out.solve_residual = r.diagnostics.solve_residual;
      break;
    }
    case PropagationMethod::kIterativePos:
    case PropagationMethod::kIterativePosNeg: {
      const auto [pos, neg] = split_pos_neg(P);
      out.zero_rows_pos = pos.zero_rows();
      out.zero_rows_neg = neg.zero_rows();
      auto r = cfg.method == PropagationMethod::kIterativePos
                   ? iterate_pos(pos, initial, cfg.propagation)
                   : iterate_posneg(pos, neg, initial, cfg.propagation);
      out.state = std::move(r.state);
      out.iterations = r.iterations;
      out.converged = r.converged;
      out.stalled_nodes = r.stalled_nodes;
      break;
    }
  }
  return out;
}

}  // namespace cikp
