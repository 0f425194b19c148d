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

// Publication datasets and masked propagation problems.
//
// A Dataset stores its observations with nodes as columns: for the citation
// corpora each node is a publication and each dictionary word is one
// observation, so X is (vocabulary size) x (number of publications). The CI
// graph is then recovered between publications.

#ifndef CIKP_DATASET_HPP_
#define CIKP_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cikp {

enum class SourceTag { kCora, kPubMedDiabetes, kSynthetic, kCustom };

std::string_view to_string(SourceTag tag);
SourceTag source_tag_from_string(std::string_view name);

struct Dataset {
  std::vector<std::string> node_ids;
  Eigen::MatrixXd X;  // M x D, one column per node
  std::vector<int> labels;  // index into category_names, one per node
  std::vector<std::string> category_names;
  SourceTag source = SourceTag::kCustom;

  std::size_t num_nodes() const { return node_ids.size(); }
  std::size_t num_samples() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t num_categories() const { return category_names.size(); }

  // Throws DataError when the shape/label invariants do not hold.
  void validate() const;

  bool operator==(const Dataset& other) const;
};

// Partition of node indices into known (K) and unknown (U). Both lists are
// sorted ascending and together cover 0..size()-1.
struct KnownMask {
  std::vector<std::size_t> known;
  std::vector<std::size_t> unknown;

  std::size_t size() const { return known.size() + unknown.size(); }
  std::vector<bool> is_known() const;

  // Builds a mask from a list of unknown nodes; throws UsageError on
  // duplicates or out-of-range indices.
  static KnownMask from_unknown(std::size_t num_nodes,
                               std::vector<std::size_t> unknown);
};

// Cora `.content`: `<paper_id>\t<f_1>\t...\t<f_W>\t<class_label>` per line,
// features 0/1. W is taken from the first line.
Dataset load_cora(const std::filesystem::path& content_path);
Dataset parse_cora(std::string_view text);

// PubMed-Diabetes `NODE.paper.tab` as distributed by Linqs; see
// docs/formats.md for the exact accepted layout.
Dataset load_pubmed(const std::filesystem::path& node_path);
Dataset parse_pubmed(std::string_view text);

// Uniform sampling of `size` nodes without replacement. With `stratified`,
// per-class quotas follow the class proportions (largest remainder). The
// selected nodes keep their original relative order.
Dataset subsample(const Dataset& ds, std::size_t size, std::uint64_t seed,
                  bool stratified = false);

enum class Normalization { kNone, kMinMax, kMeanCenter };

Normalization normalization_from_string(std::string_view name);

// Normalizes each column of X (one node's observation vector).
Dataset normalize(const Dataset& ds, Normalization method);

// Exactly round(fraction * D) unknown nodes.
KnownMask mask_labels_fraction(std::size_t num_nodes, double fraction,
                               std::uint64_t seed);
KnownMask mask_labels_count(std::size_t num_nodes, std::size_t count,
                            std::uint64_t seed);

// Canonical JSON container. Features are written sparse when fewer than half
// of the entries are non-zero.
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(std::string_view text);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Class-conditional synthetic corpus for smoke tests and demos: each class
// owns a block of "topic" words that its nodes use with probability
// `signal`; every other word fires with probability `noise`.
struct SyntheticSpec {
  std::size_t nodes = 300;
  std::size_t categories = 3;
  std::size_t words = 400;
  double signal = 0.3;
  double noise = 0.05;
  std::uint64_t seed = 1;
};

Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace cikp

#endif  // CIKP_DATASET_HPP_
