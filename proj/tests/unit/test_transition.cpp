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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cikp/error.hpp"
#include "cikp/transition.hpp"
#include "test_support.hpp"

namespace {

Eigen::MatrixXd two_node(double r) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  p(0, 1) = p(1, 0) = r;
  return p;
}

cikp::TransitionConfig with_alpha(double alpha) {
  cikp::TransitionConfig cfg;
  cfg.alpha = alpha;
  return cfg;
}

}  // namespace

TEST_CASE("exp transition of an empty graph is uniform") {
  const auto t = cikp::build_exp(Eigen::MatrixXd::Zero(3, 3), with_alpha(7.0));
  CHECK(t.kind == cikp::TransitionKind::kExp);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(t.T(i, j) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("exp transition two-node values") {
  const auto pos = cikp::build_exp(two_node(0.5), with_alpha(1.0));
  CHECK(pos.T(0, 0) == doctest::Approx(0.3775406687981454).epsilon(1e-14));
  CHECK(pos.T(0, 1) == doctest::Approx(0.6224593312018546).epsilon(1e-14));
  const auto neg = cikp::build_exp(two_node(-0.5), with_alpha(1.0));
  CHECK(neg.T(0, 0) == doctest::Approx(0.6224593312018546).epsilon(1e-14));
  CHECK(neg.T(0, 1) == doctest::Approx(0.3775406687981454).epsilon(1e-14));
  CHECK(neg.T(0, 1) > 0.0);
}

TEST_CASE("exp transition matches the naive formula and is shift invariant") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(12, rng);
  const auto t = cikp::build_exp(p, with_alpha(0.7));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const Eigen::RowVectorXd e = (0.7 * p.row(i)).array().exp();
    const Eigen::RowVectorXd naive = e / e.sum();
    CHECK((t.T.row(i) - naive).cwiseAbs().maxCoeff() < 1e-14);
    // Shifting a row of alpha*P by a constant leaves the softmax unchanged.
    const Eigen::RowVectorXd shifted = (0.7 * p.row(i)).array() + 3.25;
    const Eigen::RowVectorXd es = shifted.array().exp();
    CHECK((t.T.row(i) - es / es.sum()).cwiseAbs().maxCoeff() < 1e-13);
  }
  const auto big = cikp::build_exp(1000.0 * p, with_alpha(10.0));
  CHECK(big.T.allFinite());
  CHECK((big.T.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("larger alpha concentrates weight on the strongest neighbor") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(10, rng);
  const auto lo = cikp::build_exp(p, with_alpha(1.0));
  const auto hi = cikp::build_exp(p, with_alpha(4.0));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    const double rel_lo = lo.T(i, best) / lo.T.row(i).sum();
    const double rel_hi = hi.T(i, best) / hi.T.row(i).sum();
    CHECK(rel_hi > rel_lo);
  }
}

TEST_CASE("unknown block row sums stay below one") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(30, rng);
    const auto t = cikp::build_exp(p, with_alpha(5.0));
    const auto mask = cikp::testing::random_mask(30, 1 + trial % 10, rng);
    double mu = 0.0;
    for (std::size_t i : mask.unknown) {
      double s = 0.0;
      for (std::size_t j : mask.unknown) {
        s += t.T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      mu = std::max(mu, s);
    }
    CHECK(mu < 1.0);
  }
}

TEST_CASE("positive and negative split") {
  Eigen::MatrixXd p(3, 3);
  p << 0.0, 0.4, -0.2,
       0.4, 0.0, 0.4,
       -0.2, 0.4, 0.0;
  const auto [pos, neg] = cikp::split_pos_neg(p);
  CHECK(pos.kind == cikp::TransitionKind::kPos);
  CHECK(neg.kind == cikp::TransitionKind::kNeg);
  // Row 1 has off-diagonal entries (0.4, 0.4) and row 0 has (0.4, -0.2).
  CHECK(pos.T(0, 1) == 1.0);
  CHECK(pos.T(0, 2) == 0.0);
  CHECK(neg.T(0, 2) == 1.0);
  CHECK(neg.T(1, 0) + neg.T(1, 2) == 0.0);
  CHECK(neg.zero_rows() == 1);

  Eigen::MatrixXd q(4, 4);
  q << 0.0, 0.4, -0.2, 0.4,
       0.4, 0.0, 0.1, 0.1,
       -0.2, 0.1, 0.0, 0.3,
       0.4, 0.1, 0.3, 0.0;
  const auto [qp, qn] = cikp::split_pos_neg(q);
  CHECK(qp.T(0, 1) == doctest::Approx(0.5));
  CHECK(qp.T(0, 2) == 0.0);
  CHECK(qp.T(0, 3) == doctest::Approx(0.5));
  CHECK(qn.T(0, 1) == 0.0);
  CHECK(qn.T(0, 2) == 1.0);
  CHECK(qn.T(0, 3) == 0.0);
}

TEST_CASE("split edge cases") {
  Eigen::MatrixXd all_pos = Eigen::MatrixXd::Constant(3, 3, 0.2);
  all_pos.diagonal().setZero();
  const auto [ap, an] = cikp::split_pos_neg(all_pos);
  CHECK(an.T.isZero(0.0));
  CHECK(an.zero_rows() == 3);
  CHECK(ap.zero_rows() == 0);

  const auto [zp, zn] = cikp::split_pos_neg(Eigen::MatrixXd::Zero(4, 4));
  CHECK(zp.T.isZero(0.0));
  CHECK(zn.T.isZero(0.0));
}

TEST_CASE("split supports are disjoint and cover P") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(25, rng);
  const auto [pos, neg] = cikp::split_pos_neg(p);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    CHECK(pos.T(i, i) == 0.0);
    CHECK(neg.T(i, i) == 0.0);
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j) continue;
      const bool in_pos = pos.T(i, j) > 0.0;
      const bool in_neg = neg.T(i, j) > 0.0;
      CHECK_FALSE((in_pos && in_neg));
      CHECK((in_pos || in_neg) == (p(i, j) != 0.0));
    }
  }
}

TEST_CASE("max-normalized exponential") {
  const auto zero = cikp::build_maxnorm(Eigen::MatrixXd::Zero(3, 3), with_alpha(2.0));
  CHECK(zero.T.isOnes(0.0));
  CHECK(zero.kind == cikp::TransitionKind::kMaxNorm);

  const auto m = cikp::build_maxnorm(two_node(0.3), with_alpha(2.0));
  CHECK(m.T(0, 0) == doctest::Approx(0.5488116360940264).epsilon(1e-14));
  CHECK(m.T(1, 1) == doctest::Approx(0.5488116360940264).epsilon(1e-14));
  CHECK(m.T(0, 1) == 1.0);

  std::mt19937_64 rng(2);
  const auto r = cikp::build_maxnorm(cikp::testing::random_partial_correlation(15, rng),
                                     with_alpha(3.0));
  CHECK(r.T.maxCoeff() == 1.0);
  CHECK(r.T.minCoeff() > 0.0);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(cikp::build_exp(Eigen::MatrixXd::Zero(2, 3), with_alpha(1.0)),
                  cikp::UsageError);
  CHECK_THROWS_AS(cikp::build_exp(Eigen::MatrixXd::Zero(2, 2), with_alpha(-1.0)),
                  cikp::UsageError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(2, 2);
  nan(0, 1) = std::nan("");
  CHECK_THROWS_AS(cikp::split_pos_neg(nan), cikp::UsageError);
  CHECK_NOTHROW(cikp::build_exp(two_node(0.4), with_alpha(0.0)));
}

TEST_CASE("make_transition enforces kind invariants") {
  Eigen::MatrixXd stoch(2, 2);
  stoch << 0.5, 0.5,
           0.2, 0.8;
  CHECK_NOTHROW(cikp::make_transition(stoch, cikp::TransitionKind::kExp));
  CHECK_THROWS_AS(cikp::make_transition(stoch, cikp::TransitionKind::kPos), cikp::DataError);

  Eigen::MatrixXd pos(2, 2);
  pos << 0.0, 1.0,
         0.0, 0.0;
  CHECK_NOTHROW(cikp::make_transition(pos, cikp::TransitionKind::kPos));
  CHECK_THROWS_AS(cikp::make_transition(pos, cikp::TransitionKind::kExp), cikp::DataError);

  Eigen::MatrixXd bad = stoch;
  bad(0, 0) = 0.6;
  CHECK_THROWS_AS(cikp::make_transition(bad, cikp::TransitionKind::kExp), cikp::DataError);

  Eigen::MatrixXd maxnorm(2, 2);
  maxnorm << 1.0, 0.5,
             0.5, 0.9;
  CHECK_NOTHROW(cikp::make_transition(maxnorm, cikp::TransitionKind::kMaxNorm));
  maxnorm(0, 0) = 0.95;
  CHECK_THROWS_AS(cikp::make_transition(maxnorm, cikp::TransitionKind::kMaxNorm),
                  cikp::DataError);
  CHECK(cikp::to_matrix_kind(cikp::TransitionKind::kNeg) == cikp::MatrixKind::kNeg);
}
