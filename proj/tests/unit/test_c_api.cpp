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

#include <string>
#include <vector>

#include <json.hpp>

#include "cikp/cikp.h"

using nlohmann::json;

namespace {

std::string fixture(const char* name) { return std::string(CIKP_TEST_DATA_DIR) + "/" + name; }

std::string take(char* s) {
  std::string out = s ? s : "";
  cikp_string_free(s);
  return out;
}

cikp_matrix* chain_matrix() {
  // 0 -- 1 -- 2 with a weaker 0 -- 2 edge.
  const double p[9] = {0.0, 0.5, 0.1,
                       0.5, 0.0, 0.4,
                       0.1, 0.4, 0.0};
  cikp_matrix* m = nullptr;
  REQUIRE(cikp_matrix_create(3, 3, p, "partial-correlation", &m) == CIKP_OK);
  return m;
}

const char* kProblem = R"({
  "categories": ["red", "blue"],
  "node_ids": ["a", "b", "c"],
  "known": [{"node": "a", "label": "blue"}]
})";

}  // namespace

TEST_CASE("version and null handling") {
  CHECK(std::string(cikp_version()) == "0.1.0");
  cikp_dataset* ds = nullptr;
  CHECK(cikp_dataset_load(nullptr, "cora", &ds) == CIKP_ERROR_USAGE);
  CHECK(std::string(cikp_last_error()).find("path") != std::string::npos);
  cikp_dataset_free(nullptr);
  cikp_matrix_free(nullptr);
  cikp_string_free(nullptr);
}

TEST_CASE("dataset handles") {
  cikp_dataset* ds = nullptr;
  REQUIRE(cikp_dataset_load(fixture("cora_tiny.content").c_str(), "cora", &ds) == CIKP_OK);
  size_t nodes = 0, samples = 0, cats = 0;
  CHECK(cikp_dataset_shape(ds, &nodes, &samples, &cats) == CIKP_OK);
  CHECK(nodes == 3);
  CHECK(samples == 4);
  CHECK(cats == 2);
  int labels[3] = {};
  CHECK(cikp_dataset_labels(ds, labels, 3) == CIKP_OK);
  CHECK(labels[1] == 1);
  CHECK(cikp_dataset_labels(ds, labels, 2) == CIKP_ERROR_USAGE);

  cikp_dataset* sub = nullptr;
  CHECK(cikp_dataset_subsample(ds, 2, 7, 0, &sub) == CIKP_OK);
  CHECK(cikp_dataset_shape(sub, &nodes, nullptr, nullptr) == CIKP_OK);
  CHECK(nodes == 2);
  CHECK(cikp_dataset_subsample(ds, 9, 7, 0, &sub) == CIKP_ERROR_USAGE);
  cikp_dataset_free(sub);

  cikp_dataset* norm = nullptr;
  CHECK(cikp_dataset_normalize(ds, "minmax", &norm) == CIKP_OK);
  CHECK(cikp_dataset_normalize(ds, "zscore", &norm) == CIKP_ERROR_USAGE);
  cikp_dataset_free(norm);
  cikp_dataset_free(ds);

  CHECK(cikp_dataset_load("/nonexistent", "cora", &ds) == CIKP_ERROR_DATA);
  CHECK(cikp_dataset_load(fixture("cora_tiny.content").c_str(), "csv", &ds) ==
        CIKP_ERROR_USAGE);
  CHECK(cikp_dataset_synthetic(R"({"nodes": 10, "bogus": 1})", &ds) == CIKP_ERROR_USAGE);
}

TEST_CASE("recovery status codes") {
  cikp_dataset* ds = nullptr;
  REQUIRE(cikp_dataset_load(fixture("pubmed_tiny.tab").c_str(), "pubmed", &ds) == CIKP_OK);
  cikp_matrix* p = nullptr;
  CHECK(cikp_recover(ds, R"({"lambda": 0.0})", &p) == CIKP_ERROR_NUMERICAL);
  CHECK(std::string(cikp_last_error()).find("shrinkage") != std::string::npos);
  REQUIRE(cikp_recover(ds, R"({"lambda": 0.3})", &p) == CIKP_OK);
  size_t rows = 0, cols = 0;
  CHECK(cikp_matrix_shape(p, &rows, &cols) == CIKP_OK);
  CHECK(rows == 5);
  char kind[32];
  CHECK(cikp_matrix_kind(p, kind, sizeof kind) == CIKP_OK);
  CHECK(std::string(kind) == "partial-correlation");
  CHECK(cikp_matrix_kind(p, kind, 3) == CIKP_ERROR_USAGE);

  cikp_matrix* t = nullptr;
  CHECK(cikp_transition(p, "exp", 2.0, &t) == CIKP_OK);
  std::vector<double> values(25);
  CHECK(cikp_matrix_copy(t, values.data(), values.size()) == CIKP_OK);
  double row0 = 0.0;
  for (int j = 0; j < 5; ++j) row0 += values[static_cast<std::size_t>(j)];
  CHECK(row0 == doctest::Approx(1.0));
  CHECK(cikp_matrix_copy(t, values.data(), 3) == CIKP_ERROR_USAGE);
  cikp_matrix_free(t);
  CHECK(cikp_transition(p, "softmax", 2.0, &t) == CIKP_ERROR_USAGE);
  cikp_matrix_free(p);
  cikp_dataset_free(ds);
}

TEST_CASE("propagate through the C interface") {
  cikp_matrix* p = chain_matrix();
  for (const char* method : {"analytical-exp", "iterative-exp", "iterative-pos",
                             "iterative-posneg"}) {
    char* out = nullptr;
    const std::string opts = std::string(R"({"method": ")") + method + R"("})";
    REQUIRE(cikp_propagate(p, kProblem, opts.c_str(), &out) == CIKP_OK);
    const auto result = json::parse(take(out));
    CHECK(result["method"].get<std::string>() == method);
    REQUIRE(result["predictions"].size() == 2);
    for (const auto& pred : result["predictions"]) {
      CHECK(pred["category"].get<std::string>() == "blue");
      CHECK(pred["distribution"].size() == 2);
    }
  }

  // Under a uniform prior the KL term for P+ favours the category that the
  // positive neighbours under-weight.
  char* out = nullptr;
  REQUIRE(cikp_propagate(p, kProblem, R"({"method": "iterative-pos", "regularizer": "kl"})",
                         &out) == CIKP_OK);
  for (const auto& pred : json::parse(take(out))["predictions"]) {
    CHECK(pred["category"].get<std::string>() == "red");
  }
  CHECK(cikp_propagate(p, kProblem, R"({"method": "magic"})", &out) == CIKP_ERROR_USAGE);
  CHECK(cikp_propagate(p, kProblem, R"({"colour": 1})", &out) == CIKP_ERROR_USAGE);
  CHECK(cikp_propagate(p, R"({"categories": ["x"], "known": [{"node": 9, "label": "x"}]})",
                       nullptr, &out) == CIKP_ERROR_DATA);
  CHECK(cikp_propagate(p, "{not json", nullptr, &out) == CIKP_ERROR_DATA);
  REQUIRE(cikp_propagate(p, kProblem, R"({"selection": "threshold", "threshold": 0.99})",
                         &out) == CIKP_OK);
  for (const auto& pred : json::parse(take(out))["predictions"]) {
    CHECK(pred["category"].is_null());
  }

  const double asym[4] = {0.0, 0.5, 0.2, 0.0};
  cikp_matrix* bad = nullptr;
  REQUIRE(cikp_matrix_create(2, 2, asym, "partial-correlation", &bad) == CIKP_OK);
  CHECK(cikp_propagate(bad, R"({"categories": ["x", "y"], "known": [{"node": 0, "label": "x"}]})",
                       nullptr, &out) == CIKP_ERROR_DATA);
  cikp_matrix_free(bad);
  cikp_matrix_free(p);
}

TEST_CASE("embedding baseline through the C interface") {
  cikp_matrix* p = chain_matrix();
  char* out = nullptr;
  cikp_matrix* emb = nullptr;
  REQUIRE(cikp_embed(p, kProblem, R"({"dim": 4, "walk_length": 6, "walks_per_node": 4})",
                     &out, &emb) == CIKP_OK);
  const auto result = json::parse(take(out));
  CHECK(result["predictions"].size() == 2);
  size_t rows = 0, cols = 0;
  CHECK(cikp_matrix_shape(emb, &rows, &cols) == CIKP_OK);
  CHECK(rows == 3);
  CHECK(cols == 4);
  cikp_matrix_free(emb);
  CHECK(cikp_embed(p, kProblem, R"({"dim": 0})", &out, nullptr) == CIKP_ERROR_USAGE);
  cikp_matrix_free(p);
}

TEST_CASE("experiments through the C interface") {
  const char* spec = R"({
    "dataset": {"format": "synthetic", "synthetic": {"nodes": 40, "words": 60}},
    "subset_size": 0,
    "masking": [0.25],
    "methods": ["analytical-exp", "iterative-pos"],
    "runs": 2,
    "tune": false,
    "fixed": {"alpha": 2.0, "lambda": 0.2}
  })";
  char* js = nullptr;
  char* csv = nullptr;
  REQUIRE(cikp_experiment(spec, R"({"omit_timing": true})", &js, &csv) == CIKP_OK);
  const std::string first = take(js);
  CHECK(json::parse(first)["cells"].size() == 2);
  CHECK(take(csv).rfind("method,level", 0) == 0);
  REQUIRE(cikp_experiment(spec, R"({"omit_timing": true})", &js, nullptr) == CIKP_OK);
  CHECK(take(js) == first);

  REQUIRE(cikp_sweep_mask(spec, R"({"method": "analytical-exp", "counts": [1, 10]})", &js,
                          nullptr) == CIKP_OK);
  CHECK(json::parse(take(js))["points"].size() == 2);
  CHECK(cikp_sweep_mask(spec, R"({"counts": [1]})", &js, nullptr) == CIKP_ERROR_USAGE);
  REQUIRE(cikp_sweep_threshold(spec,
                               R"({"method": "iterative-pos", "thresholds": [0, 0.9],
                                   "relative": true, "level": 0.25})",
                               &js, &csv) == CIKP_OK);
  const auto sweep = json::parse(take(js));
  take(csv);
  CHECK(sweep["points"][0]["coverage"].get<double>() == 1.0);
  CHECK(cikp_experiment(R"({"runs": 0})", nullptr, &js, nullptr) == CIKP_ERROR_USAGE);
  CHECK(cikp_experiment("[", nullptr, &js, nullptr) == CIKP_ERROR_DATA);
}

TEST_CASE("matrix files through the C interface") {
  cikp_matrix* p = chain_matrix();
  const std::string path = "/tmp/cikp_c_api_matrix.bin";
  REQUIRE(cikp_matrix_save(p, path.c_str(), "bin") == CIKP_OK);
  CHECK(cikp_matrix_save(p, path.c_str(), "xml") == CIKP_ERROR_USAGE);
  cikp_matrix* back = nullptr;
  REQUIRE(cikp_matrix_load(path.c_str(), &back) == CIKP_OK);
  double a[9], b[9];
  cikp_matrix_copy(p, a, 9);
  cikp_matrix_copy(back, b, 9);
  for (int i = 0; i < 9; ++i) CHECK(a[i] == b[i]);
  cikp_matrix_free(back);
  cikp_matrix_free(p);
  std::remove(path.c_str());
  CHECK(cikp_matrix_create(2, 2, nullptr, "generic", &p) == CIKP_ERROR_USAGE);
}
