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

#include <algorithm>
#include <map>
#include <string>

#include "cikp/dataset.hpp"
#include "cikp/error.hpp"
#include "test_support.hpp"

using cikp::DataError;
using cikp::UsageError;

TEST_CASE("cora fixture parses into columns per paper") {
  const auto ds = cikp::load_cora(cikp::testing::fixture_path("cora_tiny.content"));
  CHECK(ds.num_nodes() == 3);
  CHECK(ds.num_samples() == 4);
  CHECK(ds.source == cikp::SourceTag::kCora);
  CHECK(ds.node_ids == std::vector<std::string>{"31336", "1061127", "1106406"});
  CHECK(ds.category_names == std::vector<std::string>{"Neural_Networks", "Rule_Learning"});
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  Eigen::MatrixXd expected(4, 3);
  expected << 0, 1, 0,
              1, 0, 0,
              0, 0, 1,
              1, 1, 0;
  CHECK(ds.X == expected);
}

TEST_CASE("cora parse errors name the line") {
  SUBCASE("empty file") { CHECK_THROWS_AS(cikp::parse_cora(""), DataError); }
  SUBCASE("ragged row") {
    const std::string text = "1\t0\t1\tA\n2\t1\tB\n";
    CHECK_THROWS_WITH_AS(cikp::parse_cora(text), doctest::Contains("line 2"), DataError);
  }
  SUBCASE("non-binary feature") {
    const std::string text = "1\t0\t1\tA\n2\t1\t7\tB\n";
    CHECK_THROWS_AS(cikp::parse_cora(text), DataError);
  }
  SUBCASE("duplicate id") {
    const std::string text = "1\t0\t1\tA\n1\t1\t0\tB\n";
    CHECK_THROWS_AS(cikp::parse_cora(text), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(cikp::load_cora("/nonexistent/cora.content"), DataError);
  }
}

TEST_CASE("pubmed fixture parses tf-idf weights") {
  const auto ds = cikp::load_pubmed(cikp::testing::fixture_path("pubmed_tiny.tab"));
  REQUIRE(ds.num_nodes() == 5);
  CHECK(ds.num_samples() == 3);
  CHECK(ds.source == cikp::SourceTag::kPubMedDiabetes);
  CHECK(ds.node_ids ==
        std::vector<std::string>{"12187484", "2344352", "14654069", "16443886", "2684155"});
  CHECK(ds.category_names == std::vector<std::string>{"1", "2", "3"});
  CHECK(ds.labels == std::vector<int>{0, 0, 2, 1, 2});
  Eigen::MatrixXd expected(3, 5);
  expected << 0.09, 0.00, 0.01, 0.00, 0.0,
              0.02, 0.00, 0.00, 0.03, 0.0,
              0.00, 0.05, 0.00, 0.04, 0.0;
  CHECK(ds.X == expected);
  CHECK(ds.X.col(4).isZero());
}

TEST_CASE("pubmed parse errors") {
  const std::string header =
      "NODE\tpaper:\n\tcat=1,2,3:label\tnumeric:w-rat:0.0\tstring:summary\n";
  CHECK_THROWS_AS(cikp::parse_pubmed(""), DataError);
  CHECK_THROWS_AS(cikp::parse_pubmed("EDGE\tx\n"), DataError);
  CHECK_THROWS_AS(cikp::parse_pubmed(header), DataError);
  CHECK_THROWS_WITH_AS(cikp::parse_pubmed(header + "7\tlabel=1\tw-bogus=0.1\n"),
                       doctest::Contains("line 3"), DataError);
  CHECK_THROWS_AS(cikp::parse_pubmed(header + "7\tlabel=9\tw-rat=0.1\n"), DataError);
  CHECK_THROWS_AS(cikp::parse_pubmed(header + "7\tw-rat=0.1\n"), DataError);
  CHECK_THROWS_AS(cikp::parse_pubmed(header + "7\tlabel=1\tw-rat=abc\n"), DataError);
  const auto ok = cikp::parse_pubmed(header + "7\tlabel=1\tw-rat=0.5\tsummary=x y\n" +
                                     "8\tlabel=2\n");
  CHECK(ok.num_nodes() == 2);
  CHECK(ok.X(0, 0) == 0.5);
}

TEST_CASE("subsample is deterministic and restricts columns") {
  cikp::SyntheticSpec spec;
  spec.nodes = 60;
  spec.words = 30;
  const auto ds = cikp::make_synthetic(spec);

  const auto a = cikp::subsample(ds, 20, 42);
  const auto b = cikp::subsample(ds, 20, 42);
  CHECK(a == b);
  CHECK(a.num_nodes() == 20);
  CHECK(a.num_samples() == ds.num_samples());
  for (std::size_t j = 0; j < a.num_nodes(); ++j) {
    const auto it = std::find(ds.node_ids.begin(), ds.node_ids.end(), a.node_ids[j]);
    REQUIRE(it != ds.node_ids.end());
    const auto src = static_cast<Eigen::Index>(it - ds.node_ids.begin());
    CHECK(a.X.col(static_cast<Eigen::Index>(j)) == ds.X.col(src));
    CHECK(a.labels[j] == ds.labels[static_cast<std::size_t>(src)]);
  }

  const auto full = cikp::subsample(ds, ds.num_nodes(), 3);
  auto ids = full.node_ids;
  auto all = ds.node_ids;
  std::sort(ids.begin(), ids.end());
  std::sort(all.begin(), all.end());
  CHECK(ids == all);

  CHECK_THROWS_AS(cikp::subsample(ds, 0, 1), UsageError);
  CHECK_THROWS_AS(cikp::subsample(ds, 61, 1), UsageError);
}

TEST_CASE("stratified subsample keeps class proportions") {
  cikp::SyntheticSpec spec;
  spec.nodes = 90;
  spec.categories = 3;
  spec.words = 20;
  const auto ds = cikp::make_synthetic(spec);
  std::map<int, int> total;
  for (int l : ds.labels) ++total[l];
  const auto sub = cikp::subsample(ds, 30, 9, true);
  std::map<int, int> got;
  for (int l : sub.labels) ++got[l];
  for (const auto& [label, count] : total) {
    const double expected = 30.0 * count / 90.0;
    CHECK(std::abs(got[label] - expected) < 1.0);
  }
}

TEST_CASE("minmax normalization") {
  cikp::Dataset ds;
  ds.node_ids = {"a", "b", "c"};
  ds.category_names = {"x", "y"};
  ds.labels = {0, 1, 0};
  ds.X.resize(2, 3);
  ds.X << 0, 2, 5,
          1, 4, 5;
  const auto out = cikp::normalize(ds, cikp::Normalization::kMinMax);
  Eigen::MatrixXd expected(2, 3);
  expected << 0, 0, 0,
              1, 1, 0;
  CHECK(out.X == expected);

  const auto none = cikp::normalize(ds, cikp::Normalization::kNone);
  CHECK(none == ds);

  const auto centered = cikp::normalize(ds, cikp::Normalization::kMeanCenter);
  CHECK(centered.X.colwise().sum().cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(cikp::normalization_from_string("zscore"), UsageError);
}

TEST_CASE("masking by fraction and count") {
  const auto m = cikp::mask_labels_fraction(300, 0.2, 5);
  CHECK(m.unknown.size() == 60);
  CHECK(m.known.size() == 240);
  CHECK(m.size() == 300);
  CHECK(m.unknown == cikp::mask_labels_fraction(300, 0.2, 5).unknown);
  CHECK(m.unknown != cikp::mask_labels_fraction(300, 0.2, 6).unknown);
  const auto flags = m.is_known();
  for (std::size_t u : m.unknown) CHECK_FALSE(flags[u]);
  for (std::size_t k : m.known) CHECK(flags[k]);

  CHECK(cikp::mask_labels_count(300, 1, 1).unknown.size() == 1);
  CHECK(cikp::mask_labels_count(300, 225, 1).unknown.size() == 225);

  CHECK_THROWS_AS(cikp::mask_labels_fraction(300, 0.0, 1), UsageError);
  CHECK_THROWS_AS(cikp::mask_labels_fraction(300, 1.0, 1), UsageError);
  CHECK_THROWS_AS(cikp::mask_labels_fraction(300, 1.5, 1), UsageError);
  CHECK_THROWS_AS(cikp::mask_labels_count(300, 300, 1), UsageError);
  CHECK_THROWS_AS(cikp::mask_labels_count(300, 0, 1), UsageError);

  CHECK_THROWS_AS(cikp::KnownMask::from_unknown(4, {1, 1}), UsageError);
  CHECK_THROWS_AS(cikp::KnownMask::from_unknown(4, {4}), UsageError);
}

TEST_CASE("dataset json round trip") {
  const auto cora = cikp::load_cora(cikp::testing::fixture_path("cora_tiny.content"));
  CHECK(cikp::dataset_from_json(cikp::dataset_to_json(cora)) == cora);

  cikp::SyntheticSpec spec;
  spec.nodes = 25;
  spec.words = 12;
  spec.noise = 0.5;
  const auto dense = cikp::make_synthetic(spec);
  CHECK(cikp::dataset_from_json(cikp::dataset_to_json(dense)) == dense);

  CHECK_THROWS_AS(cikp::dataset_from_json("{}"), DataError);
  CHECK_THROWS_AS(cikp::dataset_from_json("not json"), DataError);
}

TEST_CASE("dataset validation") {
  cikp::Dataset ds;
  ds.node_ids = {"a", "a"};
  ds.category_names = {"x", "y"};
  ds.labels = {0, 1};
  ds.X = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(ds.validate(), DataError);
  ds.node_ids = {"a", "b"};
  CHECK_NOTHROW(ds.validate());
  ds.labels = {0, 2};
  CHECK_THROWS_AS(ds.validate(), DataError);
}

TEST_CASE("synthetic generator is seeded") {
  cikp::SyntheticSpec spec;
  spec.nodes = 40;
  spec.words = 20;
  const auto a = cikp::make_synthetic(spec);
  CHECK(a.num_nodes() == 40);
  CHECK(a.num_samples() == 20);
  CHECK(a.num_categories() == 3);
  CHECK(a == cikp::make_synthetic(spec));
  spec.seed = 2;
  CHECK_FALSE(a == cikp::make_synthetic(spec));
}
