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
#include <vector>

#include "cikp/error.hpp"
#include "cikp/propagate.hpp"
#include "test_support.hpp"

using cikp::KnownMask;
using cikp::LabelState;

namespace {

Eigen::MatrixXd two_node(double r) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  p(0, 1) = p(1, 0) = r;
  return p;
}

cikp::TransitionMatrix exp_of(const Eigen::MatrixXd& p, double alpha) {
  cikp::TransitionConfig cfg;
  cfg.alpha = alpha;
  return cikp::build_exp(p, cfg);
}

cikp::PropagationConfig tight(cikp::Regularizer r = cikp::Regularizer::kNone) {
  cikp::PropagationConfig cfg;
  cfg.epsilon = 1e-14;
  cfg.max_iters = 100000;
  cfg.regularizer = r;
  return cfg;
}

double accuracy(const LabelState& s, const std::vector<int>& truth) {
  const auto preds = cikp::select(s, {});
  int correct = 0;
  for (const auto& p : preds) correct += p.category == truth[p.node];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace

TEST_CASE("init_state fills deltas and uniform rows") {
  const auto mask = KnownMask::from_unknown(3, {1, 2});
  const std::vector<int> labels{1, 0, 0};
  const auto s = cikp::init_state(mask, labels, 2);
  Eigen::MatrixXd expected(3, 2);
  expected << 0.0, 1.0,
              0.5, 0.5,
              0.5, 0.5;
  CHECK(s.n == expected);
  CHECK(s.num_categories() == 2);

  Eigen::RowVectorXd prior(2);
  prior << 0.7, 0.3;
  const std::vector<cikp::KnownRow> rows{{0, prior}};
  const auto p = cikp::init_state(mask, rows, 2);
  CHECK(p.n.row(0) == prior);

  const auto none = KnownMask::from_unknown(3, {0, 1, 2});
  CHECK_THROWS_AS(cikp::init_state(none, labels, 2), cikp::UsageError);

  Eigen::RowVectorXd bad(2);
  bad << 0.7, 0.7;
  const std::vector<cikp::KnownRow> bad_rows{{0, bad}};
  CHECK_THROWS_AS(cikp::init_state(mask, bad_rows, 2), cikp::UsageError);
  const std::vector<cikp::KnownRow> wrong_node{{1, prior}};
  CHECK_THROWS_AS(cikp::init_state(mask, wrong_node, 2), cikp::UsageError);
}

TEST_CASE("iterate_exp with every node known is a no-op") {
  const auto mask = KnownMask::from_unknown(2, {});
  const auto s = cikp::init_state(mask, std::vector<int>{0, 1}, 2);
  const auto r = cikp::iterate_exp(exp_of(two_node(0.3), 2.0), s, tight());
  CHECK(r.iterations == 0);
  CHECK(r.converged);
  CHECK(r.state.n == s.n);
  const auto a = cikp::analytical(exp_of(two_node(0.3), 2.0), s);
  CHECK(a.state.n == s.n);
}

TEST_CASE("two-node graphs converge to the known row") {
  const auto mask = KnownMask::from_unknown(2, {1});
  const auto s = cikp::init_state(mask, std::vector<int>{1, 0}, 2);
  const auto r = cikp::iterate_exp(exp_of(two_node(0.4), 2.0), s, tight());
  CHECK(r.converged);
  CHECK((r.state.n.row(1) - s.n.row(0)).norm() < 1e-6);

  const auto [pos, neg] = cikp::split_pos_neg(two_node(0.4));
  const auto rp = cikp::iterate_pos(pos, s, tight());
  CHECK(rp.converged);
  CHECK((rp.state.n.row(1) - s.n.row(0)).norm() < 1e-12);
  const auto rpn = cikp::iterate_posneg(pos, neg, s, tight());
  CHECK((rpn.state.n.row(1) - s.n.row(0)).norm() < 1e-12);
}

TEST_CASE("iterate_exp agrees with analytical on a random instance") {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(50, rng);
  const auto pe = exp_of(p, 2.0);
  const auto mask = cikp::testing::random_mask(50, 10, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(50, 3, rng), 3);
  const auto it = cikp::iterate_exp(pe, s, tight());
  const auto an = cikp::analytical(pe, s);
  CHECK(it.converged);
  CHECK((it.state.n - an.state.n).norm() < 1e-5);
  CHECK(an.diagnostics.mu < 1.0);
  CHECK(an.diagnostics.solve_residual < 1e-10);
  CHECK(an.diagnostics.iterations_equivalent > 0.0);
}

TEST_CASE("analytical matches a truncated power series") {
  std::mt19937_64 rng(29);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(30, rng);
  const auto pe = exp_of(p, 1.5);
  const auto mask = cikp::testing::random_mask(30, 6, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(30, 4, rng), 4);
  const auto an = cikp::analytical(pe, s);

  std::vector<Eigen::Index> u(mask.unknown.begin(), mask.unknown.end());
  std::vector<Eigen::Index> k(mask.known.begin(), mask.known.end());
  const Eigen::MatrixXd a = pe.T(u, u);
  const Eigen::MatrixXd b = pe.T(u, k) * s.n(k, Eigen::all);
  const double mu = an.diagnostics.mu;
  const int terms = 10 * static_cast<int>(std::ceil(std::log(1e-10) / std::log(mu)));
  Eigen::MatrixXd sum = b;
  Eigen::MatrixXd term = b;
  for (int i = 1; i <= terms; ++i) {
    term = a * term;
    sum += term;
  }
  CHECK((an.state.n(u, Eigen::all) - sum).norm() < 1e-6);
}

TEST_CASE("alpha zero gives every unknown node the mean known row") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(12, rng);
  const auto mask = cikp::testing::random_mask(12, 5, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(12, 3, rng), 3);
  const auto an = cikp::analytical(exp_of(p, 0.0), s);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(3);
  for (std::size_t i : mask.known) mean += s.n.row(static_cast<Eigen::Index>(i));
  mean /= static_cast<double>(mask.known.size());
  for (std::size_t i : mask.unknown) {
    CHECK((an.state.n.row(static_cast<Eigen::Index>(i)) - mean).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("iterate deltas decay geometrically") {
  std::mt19937_64 rng(31);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(40, rng);
  const auto pe = exp_of(p, 2.0);
  const auto mask = cikp::testing::random_mask(40, 8, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(40, 3, rng), 3);
  const auto r = cikp::iterate_exp(pe, s, tight());
  const auto mu = cikp::analytical(pe, s).diagnostics.mu;
  REQUIRE(r.max_changes.size() > 3);
  // The per-step max-abs change is bounded by mu times the previous one.
  for (std::size_t t = 1; t < r.max_changes.size(); ++t) {
    if (r.max_changes[t - 1] < 1e-13) break;
    CHECK(r.max_changes[t] <= (mu + 1e-6) * r.max_changes[t - 1]);
  }
}

TEST_CASE("iterative limit ignores the initial unknown rows") {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(25, rng);
  const auto pe = exp_of(p, 2.0);
  const auto mask = cikp::testing::random_mask(25, 7, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(25, 3, rng), 3);
  const auto a = cikp::iterate_exp(pe, cikp::testing::randomize_unknown(s, rng), tight());
  const auto b = cikp::iterate_exp(pe, cikp::testing::randomize_unknown(s, rng), tight());
  CHECK((a.state.n - b.state.n).norm() < 1e-5);
}

TEST_CASE("known rows are never modified") {
  std::mt19937_64 rng(43);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(20, rng);
  const auto mask = cikp::testing::random_mask(20, 6, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(20, 3, rng), 3);
  const auto [pos, neg] = cikp::split_pos_neg(p);
  std::vector<LabelState> outs;
  outs.push_back(cikp::iterate_exp(exp_of(p, 2.0), s, tight()).state);
  outs.push_back(cikp::analytical(exp_of(p, 2.0), s).state);
  for (auto r : {cikp::Regularizer::kNone, cikp::Regularizer::kKL,
                 cikp::Regularizer::kWasserstein}) {
    outs.push_back(cikp::iterate_pos(pos, s, tight(r)).state);
    outs.push_back(cikp::iterate_posneg(pos, neg, s, tight(r)).state);
  }
  for (const auto& o : outs) {
    for (std::size_t k : mask.known) {
      const auto row = static_cast<Eigen::Index>(k);
      for (Eigen::Index c = 0; c < 3; ++c) CHECK(o.n(row, c) == s.n(row, c));
    }
    CHECK((o.n.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(o.n.minCoeff() >= 0.0);
  }
}

TEST_CASE("posneg without negative edges reduces to pos") {
  std::mt19937_64 rng(47);
  Eigen::MatrixXd p = cikp::testing::random_partial_correlation(15, rng).cwiseAbs();
  const auto mask = cikp::testing::random_mask(15, 5, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(15, 2, rng), 2);
  const auto [pos, neg] = cikp::split_pos_neg(p);
  const auto a = cikp::iterate_pos(pos, s, tight());
  const auto b = cikp::iterate_posneg(pos, neg, s, tight());
  CHECK(a.iterations == b.iterations);
  CHECK(a.state.n == b.state.n);
}

TEST_CASE("posneg with KL beats pos-only on a two-cluster graph") {
  // Two clusters of 10 nodes. Sparse positive edges inside each cluster,
  // dense negative edges across; 14 of 20 labels masked.
  double posneg_total = 0.0;
  double pos_total = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> weight(0.05, 0.3);
    std::vector<int> labels(20);
    for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(i)] = i < 10 ? 0 : 1;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(20, 20);
    for (int i = 0; i < 20; ++i) {
      for (int j = i + 1; j < 20; ++j) {
        const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
        if (same && coin(rng) < 0.1) p(i, j) = p(j, i) = weight(rng);
        if (!same && coin(rng) < 0.8) p(i, j) = p(j, i) = -weight(rng);
      }
    }
    const auto mask = cikp::testing::random_mask(20, 6, rng);
    const auto s = cikp::init_state(mask, labels, 2);
    const auto [pos, neg] = cikp::split_pos_neg(p);
    cikp::PropagationConfig cfg;
    pos_total += accuracy(cikp::iterate_pos(pos, s, cfg).state, labels);
    cfg.regularizer = cikp::Regularizer::kKL;
    posneg_total += accuracy(cikp::iterate_posneg(pos, neg, s, cfg).state, labels);
  }
  MESSAGE("posneg+KL " << posneg_total / 50 << " vs pos " << pos_total / 50);
  CHECK(posneg_total > pos_total);
}

TEST_CASE("zero rows stall instead of inventing mass") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(3, 3);
  p(0, 1) = p(1, 0) = 0.5;
  const auto mask = KnownMask::from_unknown(3, {1, 2});
  const auto s = cikp::init_state(mask, std::vector<int>{0, 0, 0}, 2);
  const auto [pos, neg] = cikp::split_pos_neg(p);
  const auto r = cikp::iterate_pos(pos, s, tight());
  CHECK(r.stalled_nodes == 1);
  CHECK(r.state.n.row(2) == s.n.row(2));
  CHECK(r.state.n(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("non-convergence is reported, not thrown") {
  std::mt19937_64 rng(53);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(20, rng);
  const auto mask = cikp::testing::random_mask(20, 2, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(20, 3, rng), 3);
  cikp::PropagationConfig cfg;
  cfg.epsilon = 1e-300;
  cfg.max_iters = 2;
  const auto r = cikp::iterate_exp(exp_of(p, 2.0), s, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cikp::iterate_exp(exp_of(p, 2.0), s, cfg), cikp::UsageError);
}

TEST_CASE("transition kind and shape are checked") {
  const auto mask = KnownMask::from_unknown(2, {1});
  const auto s = cikp::init_state(mask, std::vector<int>{0, 0}, 2);
  const auto [pos, neg] = cikp::split_pos_neg(two_node(0.3));
  CHECK_THROWS_AS(cikp::iterate_exp(pos, s, tight()), cikp::UsageError);
  CHECK_THROWS_AS(cikp::analytical(exp_of(Eigen::MatrixXd::Zero(3, 3), 1.0), s),
                  cikp::UsageError);
}

TEST_CASE("regularizer terms") {
  Eigen::MatrixXd n0(1, 2);
  n0 << 0.5, 0.5;
  Eigen::MatrixXd q(1, 2);
  q << 1.0, 0.0;
  const auto kl = cikp::regularizer_term(n0, q, cikp::Regularizer::kKL);
  CHECK(kl(0, 0) == doctest::Approx(-0.34657359027997264).epsilon(1e-14));
  CHECK(kl(0, 1) == doctest::Approx(13.468936967684302).epsilon(1e-12));
  CHECK(cikp::regularizer_term(n0, n0, cikp::Regularizer::kKL).isZero(0.0));
  CHECK(cikp::regularizer_term(n0, q, cikp::Regularizer::kNone).isZero(0.0));

  Eigen::MatrixXd zero_prior(1, 2);
  zero_prior << 0.0, 1.0;
  CHECK(cikp::regularizer_term(zero_prior, q, cikp::Regularizer::kKL)(0, 0) == 0.0);

  Eigen::MatrixXd u3 = Eigen::MatrixXd::Constant(1, 3, 1.0 / 3.0);
  Eigen::MatrixXd e0(1, 3);
  e0 << 1.0, 0.0, 0.0;
  const auto w = cikp::regularizer_term(u3, e0, cikp::Regularizer::kWasserstein);
  CHECK(w(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(w(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(w(0, 2) == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(cikp::regularizer_term(u3, u3, cikp::Regularizer::kWasserstein).isZero(1e-15));

  CHECK_THROWS_AS(cikp::regularizer_term(n0, u3, cikp::Regularizer::kKL), cikp::UsageError);
  CHECK(cikp::regularizer_from_string("kl") == cikp::Regularizer::kKL);
  CHECK_THROWS_AS(cikp::regularizer_from_string("js"), cikp::UsageError);
}

TEST_CASE("selection") {
  const auto mask = KnownMask::from_unknown(4, {1, 2, 3});
  LabelState s = cikp::init_state(mask, std::vector<int>{0, 0, 0, 0}, 2);
  s.n.row(1) << 0.1, 0.9;
  s.n.row(2) << 0.5, 0.5;
  s.n.row(3) << 0.8, 0.2;
  const auto argmax = cikp::select(s, {});
  REQUIRE(argmax.size() == 3);
  CHECK(argmax[0].node == 1);
  CHECK(argmax[0].category == 1);
  CHECK(argmax[1].category == 0);
  CHECK(argmax[1].confidence == doctest::Approx(0.5));
  CHECK(argmax[2].category == 0);
  CHECK(argmax[0].confidence == doctest::Approx(1.0 / (1.0 + std::exp(-0.8))));

  cikp::SelectionStrategy at_floor{cikp::SelectionMode::kConfidenceThreshold, 0.5};
  for (const auto& p : cikp::select(s, at_floor)) CHECK_FALSE(p.abstained());

  cikp::SelectionStrategy strict{cikp::SelectionMode::kConfidenceThreshold, 0.66};
  const auto some = cikp::select(s, strict);
  CHECK_FALSE(some[0].abstained());
  CHECK(some[1].abstained());
  CHECK(some[2].abstained());

  CHECK_THROWS_AS(cikp::select(s, {cikp::SelectionMode::kConfidenceThreshold, 0.3}),
                  cikp::UsageError);
  CHECK_THROWS_AS(cikp::select(s, {cikp::SelectionMode::kConfidenceThreshold, 1.5}),
                  cikp::UsageError);

  // A second softmax keeps the argmax.
  LabelState twice = s;
  for (Eigen::Index i = 0; i < 4; ++i) twice.n.row(i) = cikp::softmax(s.n.row(i));
  const auto again = cikp::select(twice, {});
  for (std::size_t i = 0; i < argmax.size(); ++i) CHECK(again[i].category == argmax[i].category);
}

TEST_CASE("knowprop dispatches every method deterministically") {
  std::mt19937_64 rng(59);
  const Eigen::MatrixXd p = cikp::testing::random_partial_correlation(30, rng);
  const auto mask = cikp::testing::random_mask(30, 10, rng);
  const auto s = cikp::init_state(mask, cikp::testing::random_labels(30, 3, rng), 3);
  for (auto m : {cikp::PropagationMethod::kIterativeExp, cikp::PropagationMethod::kIterativePos,
                 cikp::PropagationMethod::kIterativePosNeg,
                 cikp::PropagationMethod::kAnalyticalExp}) {
    cikp::KnowPropConfig cfg;
    cfg.method = m;
    cfg.propagation.regularizer = cikp::Regularizer::kKL;
    const auto a = cikp::knowprop(p, s, cfg);
    const auto b = cikp::knowprop(p, s, cfg);
    CHECK(a.state.n == b.state.n);
    CHECK(a.iterations == b.iterations);
    if (m == cikp::PropagationMethod::kIterativeExp ||
        m == cikp::PropagationMethod::kAnalyticalExp) {
      CHECK(a.mu > 0.0);
      CHECK(a.mu < 1.0);
    }
  }
}
