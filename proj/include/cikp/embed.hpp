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

// Embedding baseline: weighted node2vec walks over the max-normalized
// exponential matrix, skip-gram with negative sampling, and a classifier
// trained on the known nodes' embeddings.

#ifndef CIKP_EMBED_HPP_
#define CIKP_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cikp/dataset.hpp"
#include "cikp/propagate.hpp"
#include "cikp/transition.hpp"

namespace cikp {

struct EmbeddingConfig {
  std::size_t dimension = 64;
  std::size_t walk_length = 20;
  std::size_t walks_per_node = 10;
  double return_param = 1.0;  // p
  double inout_param = 2.0;   // q
  std::size_t window = 5;
  std::size_t negative_samples = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of its value
  std::uint64_t seed = 1;

  void validate() const;
};

using Walk = std::vector<std::uint32_t>;
using WalkCorpus = std::vector<Walk>;

// adjacency(t, x) decides the in-out bias: after moving t -> v, candidate x
// gets weight Pm(v, x) times 1/p if x == t, 1 if adjacent(t, x), 1/q
// otherwise. Self-transitions are excluded unless the graph has one node.
using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

WalkCorpus random_walks(const TransitionMatrix& pm, const Adjacency& adjacency,
                        const EmbeddingConfig& cfg);

// Every pair of distinct nodes adjacent.
WalkCorpus random_walks(const TransitionMatrix& pm, const EmbeddingConfig& cfg);

struct NodeEmbeddings {
  Eigen::MatrixXd vectors;  // D x E
};

// Skip-gram with negative sampling (unigram^0.75 noise). Throws UsageError
// on an empty corpus.
NodeEmbeddings train_embeddings(const WalkCorpus& corpus, std::size_t num_nodes,
                                const EmbeddingConfig& cfg);

enum class ClassifierModel { kLogisticRegression, kMLP };
enum class ClassifierLoss { kCrossEntropy, kSquared };

ClassifierModel classifier_model_from_string(std::string_view name);

struct ClassifierConfig {
  ClassifierModel model = ClassifierModel::kLogisticRegression;
  ClassifierLoss loss = ClassifierLoss::kCrossEntropy;
  std::size_t hidden_units = 32;  // MLP only
  double learning_rate = 0.05;
  double l2 = 1e-4;
  std::size_t max_epochs = 500;
  std::size_t patience = 25;
  double holdout_fraction = 0.2;  // early-stopping fold, used when |K| >= 5
  double tolerance = 1e-6;        // stop once the training loss drops below
  std::uint64_t seed = 1;
};

struct TrainReport {
  double final_loss = 0.0;
  std::size_t epochs_run = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Multinomial classifier over standardized embeddings.
class Classifier {
 public:
  Classifier() = default;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t num_categories() const { return num_categories_; }

  // Rows of `features` are samples; returns row-stochastic probabilities.
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const;

 private:
  friend class ClassifierTrainer;

  ClassifierModel model_ = ClassifierModel::kLogisticRegression;
  std::size_t num_categories_ = 0;
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
  Eigen::MatrixXd w1_;
  Eigen::RowVectorXd b1_;
  Eigen::MatrixXd w2_;  // MLP output layer
  Eigen::RowVectorXd b2_;
};

struct FitResult {
  Classifier classifier;
  TrainReport report;
};

FitResult fit_classifier(const NodeEmbeddings& embeddings, const KnownMask& mask,
                         std::span<const int> labels, std::size_t categories,
                         const ClassifierConfig& cfg);

// Rows follow mask.unknown. Throws UsageError on a dimension mismatch.
Eigen::MatrixXd predict_unknown(const Classifier& classifier,
                                const NodeEmbeddings& embeddings,
                                const KnownMask& mask);

struct KnowPropEmbeddingConfig {
  TransitionConfig transition;
  EmbeddingConfig embedding;
  ClassifierConfig classifier;
};

struct KnowPropEmbeddingResult {
  LabelState state;  // known rows as given, unknown rows = classifier output
  NodeEmbeddings embeddings;
  TrainReport report;
};

// Max-normalization of P, walks (adjacency = positive partial correlation),
// embeddings, classifier, prediction. Training labels are the argmax of the
// known rows of `initial`.
KnowPropEmbeddingResult knowprop_embedding(const Eigen::MatrixXd& P,
                                           const LabelState& initial,
                                           const KnowPropEmbeddingConfig& cfg);

}  // namespace cikp

#endif  // CIKP_EMBED_HPP_
