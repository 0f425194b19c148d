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

#include "cikp/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cikp/error.hpp"
#include "cikp/seed.hpp"

namespace cikp {
namespace {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double uniform01(std::mt19937_64& rng) {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementations.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index i with probability weights[i] / sum, by a linear scan of the
// cumulative weights.
std::size_t sample_weighted(const std::vector<double>& weights, double total,
                            std::mt19937_64& rng) {
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

// grad += g * out; out += g * center.
void sgns_update(double* __restrict grad, double* __restrict out,
                 const double* __restrict center, double g, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    grad[k] += g * out[k];
    out[k] += g * center[k];
  }
}

double sigmoid(double x) {
  x = std::clamp(x, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

void EmbeddingConfig::validate() const {
  if (dimension < 1) throw UsageError("embedding dimension must be >= 1");
  if (walk_length < 1 || walks_per_node < 1) {
    throw UsageError("walk_length and walks_per_node must be >= 1");
  }
  if (!(return_param > 0.0) || !(inout_param > 0.0)) {
    throw UsageError("node2vec p and q must be positive");
  }
  if (window < 1) throw UsageError("window must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
}

WalkCorpus random_walks(const TransitionMatrix& pm, const Adjacency& adjacency,
                        const EmbeddingConfig& cfg) {
  cfg.validate();
  const Index d = pm.T.rows();
  if (pm.T.cols() != d) throw UsageError("walk matrix must be square");
  if (adjacency.rows() != d || adjacency.cols() != d) {
    throw UsageError("adjacency shape does not match the walk matrix");
  }
  if ((pm.T.array() <= 0.0).any()) {
    throw UsageError("walk weights must be strictly positive");
  }
  const double inv_p = 1.0 / cfg.return_param;
  const double inv_q = 1.0 / cfg.inout_param;

  WalkCorpus corpus;
  corpus.reserve(cfg.walks_per_node * static_cast<std::size_t>(d));
  std::vector<double> weights(static_cast<std::size_t>(d));
  for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
    for (Index start = 0; start < d; ++start) {
      std::mt19937_64 rng(derive_seed(cfg.seed, round, static_cast<std::uint64_t>(start)));
      Walk walk;
      walk.reserve(cfg.walk_length);
      walk.push_back(static_cast<std::uint32_t>(start));
      while (walk.size() < cfg.walk_length) {
        const Index v = walk.back();
        if (d == 1) {
          walk.push_back(static_cast<std::uint32_t>(v));
          continue;
        }
        const bool first = walk.size() == 1;
        const Index t = first ? -1 : static_cast<Index>(walk[walk.size() - 2]);
        double total = 0.0;
        for (Index x = 0; x < d; ++x) {
          double w = 0.0;
          if (x != v) {
            w = pm.T(v, x);
            if (!first) {
              if (x == t) {
                w *= inv_p;
              } else if (!adjacency(t, x)) {
                w *= inv_q;
              }
            }
          }
          weights[static_cast<std::size_t>(x)] = w;
          total += w;
        }
        walk.push_back(static_cast<std::uint32_t>(sample_weighted(weights, total, rng)));
      }
      corpus.push_back(std::move(walk));
    }
  }
  return corpus;
}

WalkCorpus random_walks(const TransitionMatrix& pm, const EmbeddingConfig& cfg) {
  Adjacency all = Adjacency::Constant(pm.T.rows(), pm.T.cols(), true);
  all.diagonal().setConstant(false);
  return random_walks(pm, all, cfg);
}

NodeEmbeddings train_embeddings(const WalkCorpus& corpus, std::size_t num_nodes,
                                const EmbeddingConfig& cfg) {
  cfg.validate();
  std::size_t tokens = 0;
  for (const auto& walk : corpus) tokens += walk.size();
  if (tokens == 0) throw UsageError("cannot train embeddings on an empty corpus");

  const std::size_t e = cfg.dimension;
  std::vector<double> counts(num_nodes, 0.0);
  for (const auto& walk : corpus) {
    for (auto node : walk) {
      if (node >= num_nodes) throw UsageError("walk visits a node outside the graph");
      counts[node] += 1.0;
    }
  }
  // Cumulative unigram^0.75 noise distribution.
  std::vector<double> noise_cdf(num_nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    acc += std::pow(counts[i], 0.75);
    noise_cdf[i] = acc;
  }
  auto draw_noise = [&](std::mt19937_64& rng) {
    const double target = uniform01(rng) * acc;
    const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), target);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - noise_cdf.begin(), static_cast<std::ptrdiff_t>(num_nodes) - 1));
  };

  std::mt19937_64 rng(derive_seed(cfg.seed, 0x5347u, 0));
  std::vector<double> input(num_nodes * e);
  for (double& w : input) w = (uniform01(rng) - 0.5) / static_cast<double>(e);
  std::vector<double> output(num_nodes * e, 0.0);

  const double total_steps = static_cast<double>(tokens * cfg.epochs);
  double processed = 0.0;
  std::vector<double> grad(e);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : corpus) {
      const auto len = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        const double lr =
            cfg.learning_rate * std::max(1e-4, 1.0 - processed / (total_steps + 1.0));
        processed += 1.0;
        const auto shrink = static_cast<std::ptrdiff_t>(rng() % cfg.window);
        const auto win = static_cast<std::ptrdiff_t>(cfg.window) - shrink;
        double* center = &input[walk[static_cast<std::size_t>(i)] * e];
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - win);
             j <= std::min(len - 1, i + win); ++j) {
          if (j == i) continue;
          const std::size_t context = walk[static_cast<std::size_t>(j)];
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t s = 0; s <= cfg.negative_samples; ++s) {
            std::size_t target = context;
            double label = 1.0;
            if (s > 0) {
              target = draw_noise(rng);
              if (target == context) continue;
              label = 0.0;
            }
            const double g =
                (label - sigmoid(dot(center, &output[target * e], e))) * lr;
            sgns_update(grad.data(), &output[target * e], center, g, e);
          }
          for (std::size_t k = 0; k < e; ++k) center[k] += grad[k];
        }
      }
    }
  }
  NodeEmbeddings result;
  result.vectors = Eigen::Map<const RowMatrix>(input.data(), static_cast<Index>(num_nodes),
                                               static_cast<Index>(e));
  return result;
}

ClassifierModel classifier_model_from_string(std::string_view name) {
  if (name == "logistic" || name == "lr") return ClassifierModel::kLogisticRegression;
  if (name == "mlp") return ClassifierModel::kMLP;
  throw UsageError("unknown classifier '" + std::string(name) + "'");
}

Eigen::MatrixXd Classifier::predict_proba(const Eigen::MatrixXd& features) const {
  if (static_cast<std::size_t>(features.cols()) != input_dim()) {
    throw UsageError("classifier expects " + std::to_string(input_dim()) +
                     "-dimensional inputs, got " + std::to_string(features.cols()));
  }
  Eigen::MatrixXd xs = (features.rowwise() - mean_).array().rowwise() / scale_.array();
  Eigen::MatrixXd logits;
  if (model_ == ClassifierModel::kMLP) {
    Eigen::MatrixXd h = ((xs * w1_).rowwise() + b1_).array().tanh();
    logits = (h * w2_).rowwise() + b2_;
  } else {
    logits = (xs * w1_).rowwise() + b1_;
  }
  for (Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return logits;
}

// Full-batch Adam on the classifier parameters.
class ClassifierTrainer {
 public:
  ClassifierTrainer(const ClassifierConfig& cfg, std::size_t input_dim,
                    std::size_t categories)
      : cfg_(cfg) {
    model_.model_ = cfg.model;
    model_.num_categories_ = categories;
    const auto e = static_cast<Index>(input_dim);
    const auto c = static_cast<Index>(categories);
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x434cu, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    if (cfg.model == ClassifierModel::kMLP) {
      const auto h = static_cast<Index>(cfg.hidden_units);
      model_.w1_ = Eigen::MatrixXd::NullaryExpr(e, h, [&]() {
        return normal(rng) / std::sqrt(static_cast<double>(e));
      });
      model_.b1_ = Eigen::RowVectorXd::Zero(h);
      model_.w2_ = Eigen::MatrixXd::NullaryExpr(h, c, [&]() {
        return normal(rng) / std::sqrt(static_cast<double>(h));
      });
      model_.b2_ = Eigen::RowVectorXd::Zero(c);
    } else {
      model_.w1_ = Eigen::MatrixXd::Zero(e, c);
      model_.b1_ = Eigen::RowVectorXd::Zero(c);
    }
    reset_moments();
  }

  void set_scaling(const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& scale) {
    model_.mean_ = mean;
    model_.scale_ = scale;
  }

  Classifier& model() { return model_; }

  double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
    const Eigen::MatrixXd p = model_.predict_proba(x);
    double l = 0.0;
    if (cfg_.loss == ClassifierLoss::kCrossEntropy) {
      l = -(y.array() * p.array().max(1e-300).log()).sum();
    } else {
      l = (p - y).squaredNorm();
    }
    return l / static_cast<double>(x.rows());
  }

  void step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const double n = static_cast<double>(x.rows());
    const Eigen::MatrixXd xs =
        (x.rowwise() - model_.mean_).array().rowwise() / model_.scale_.array();
    Eigen::MatrixXd hidden;
    Eigen::MatrixXd logits;
    if (model_.model_ == ClassifierModel::kMLP) {
      hidden = ((xs * model_.w1_).rowwise() + model_.b1_).array().tanh();
      logits = (hidden * model_.w2_).rowwise() + model_.b2_;
    } else {
      logits = (xs * model_.w1_).rowwise() + model_.b1_;
    }
    Eigen::MatrixXd p = logits;
    for (Index i = 0; i < p.rows(); ++i) {
      auto row = p.row(i);
      row.array() = (row.array() - row.maxCoeff()).exp();
      row /= row.sum();
    }
    Eigen::MatrixXd d_logits;
    if (cfg_.loss == ClassifierLoss::kCrossEntropy) {
      d_logits = (p - y) / n;
    } else {
      const Eigen::MatrixXd g = 2.0 * (p - y) / n;
      const Eigen::VectorXd inner = (g.array() * p.array()).rowwise().sum();
      d_logits = p.array() * (g.colwise() - inner).array();
    }

    ++t_;
    if (model_.model_ == ClassifierModel::kMLP) {
      Eigen::MatrixXd gw2 = hidden.transpose() * d_logits + cfg_.l2 * model_.w2_;
      Eigen::RowVectorXd gb2 = d_logits.colwise().sum();
      Eigen::MatrixXd d_hidden = (d_logits * model_.w2_.transpose()).array() *
                                 (1.0 - hidden.array().square());
      Eigen::MatrixXd gw1 = xs.transpose() * d_hidden + cfg_.l2 * model_.w1_;
      Eigen::RowVectorXd gb1 = d_hidden.colwise().sum();
      adam(model_.w1_, gw1, m_[0], v_[0]);
      adam(model_.b1_, gb1, m_[1], v_[1]);
      adam(model_.w2_, gw2, m_[2], v_[2]);
      adam(model_.b2_, gb2, m_[3], v_[3]);
    } else {
      Eigen::MatrixXd gw = xs.transpose() * d_logits + cfg_.l2 * model_.w1_;
      Eigen::RowVectorXd gb = d_logits.colwise().sum();
      adam(model_.w1_, gw, m_[0], v_[0]);
      adam(model_.b1_, gb, m_[1], v_[1]);
    }
  }

 private:
  void reset_moments() {
    auto zeros_like = [](const auto& m) {
      return Eigen::MatrixXd::Zero(m.rows(), m.cols()).eval();
    };
    m_[0] = v_[0] = zeros_like(model_.w1_);
    m_[1] = v_[1] = zeros_like(model_.b1_);
    m_[2] = v_[2] = zeros_like(model_.w2_);
    m_[3] = v_[3] = zeros_like(model_.b2_);
  }

  template <typename Param, typename Grad>
  void adam(Param& param, const Grad& grad, Eigen::MatrixXd& m, Eigen::MatrixXd& v) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    const auto g = grad.reshaped(param.rows(), param.cols()).eval();
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    param -= (cfg_.learning_rate * (m / c1).array() /
              ((v / c2).array().sqrt() + kEps)).matrix();
  }

  ClassifierConfig cfg_;
  Classifier model_;
  Eigen::MatrixXd m_[4];
  Eigen::MatrixXd v_[4];
  std::size_t t_ = 0;
};

namespace {

Eigen::MatrixXd one_hot(const std::vector<int>& labels, std::size_t categories) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Index>(labels.size()),
                                            static_cast<Index>(categories));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Index>(i), labels[i]) = 1.0;
  return y;
}

// Trains for exactly `epochs` steps, or until the training loss drops below
// the tolerance. Returns the trainer holding the final parameters.
ClassifierTrainer train_fixed(const ClassifierConfig& cfg, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y, const Eigen::RowVectorXd& mean,
                              const Eigen::RowVectorXd& scale, std::size_t categories,
                              std::size_t epochs, TrainReport& report) {
  ClassifierTrainer trainer(cfg, static_cast<std::size_t>(x.cols()), categories);
  trainer.set_scaling(mean, scale);
  report.epochs_run = 0;
  report.converged = false;
  for (std::size_t ep = 0; ep < epochs; ++ep) {
    trainer.step(x, y);
    ++report.epochs_run;
    if (trainer.loss(x, y) < cfg.tolerance) {
      report.converged = true;
      break;
    }
  }
  report.final_loss = trainer.loss(x, y);
  return trainer;
}

}  // namespace

FitResult fit_classifier(const NodeEmbeddings& embeddings, const KnownMask& mask,
                         std::span<const int> labels, std::size_t categories,
                         const ClassifierConfig& cfg) {
  const auto d = static_cast<std::size_t>(embeddings.vectors.rows());
  if (mask.size() != d || labels.size() != d) {
    throw UsageError("embeddings, mask and labels must cover the same nodes");
  }
  if (mask.known.empty()) throw UsageError("classifier needs at least one known node");
  if (categories < 1) throw UsageError("need at least one category");

  FitResult result;
  std::vector<std::size_t> per_class(categories, 0);
  std::vector<int> known_labels;
  for (std::size_t k : mask.known) {
    const int label = labels[k];
    if (label < 0 || static_cast<std::size_t>(label) >= categories) {
      throw UsageError("known label out of range");
    }
    ++per_class[static_cast<std::size_t>(label)];
    known_labels.push_back(label);
  }
  if (mask.known.size() == 1) {
    result.report.warnings.push_back("only one known node; the classifier is degenerate");
  } else if (mask.known.size() < categories) {
    result.report.warnings.push_back("fewer known nodes than categories");
  }
  for (std::size_t c = 0; c < categories; ++c) {
    if (per_class[c] == 0) {
      result.report.warnings.push_back("category " + std::to_string(c) +
                                       " has no known node and can never be predicted");
    }
  }

  const std::vector<Index> known(mask.known.begin(), mask.known.end());
  const Eigen::MatrixXd x = embeddings.vectors(known, Eigen::all);
  const Eigen::MatrixXd y = one_hot(known_labels, categories);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale =
      ((x.rowwise() - mean).array().square().colwise().mean()).sqrt();
  scale = (scale.array() > 1e-12).select(scale, 1.0);

  // Pick the epoch count on a held-out fold, then refit on every known node.
  std::size_t epochs = cfg.max_epochs;
  const std::size_t nk = known.size();
  const auto holdout =
      static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(nk)));
  if (nk >= 5 && holdout >= 1 && holdout < nk) {
    std::vector<std::size_t> order(nk);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x484fu, 0));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
    std::vector<Index> fit_rows(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
    const Eigen::MatrixXd x_fit = x(fit_rows, Eigen::all);
    const Eigen::MatrixXd y_fit = y(fit_rows, Eigen::all);
    const Eigen::MatrixXd x_val = x(val_rows, Eigen::all);
    const Eigen::MatrixXd y_val = y(val_rows, Eigen::all);

    ClassifierTrainer trainer(cfg, static_cast<std::size_t>(x.cols()), categories);
    trainer.set_scaling(mean, scale);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 1;
    std::size_t since_best = 0;
    for (std::size_t ep = 1; ep <= cfg.max_epochs; ++ep) {
      trainer.step(x_fit, y_fit);
      const double val = trainer.loss(x_val, y_val);
      if (val < best - 1e-12) {
        best = val;
        best_epoch = ep;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
    epochs = best_epoch;
  }

  ClassifierTrainer trainer =
      train_fixed(cfg, x, y, mean, scale, categories, epochs, result.report);
  if (epochs < cfg.max_epochs) result.report.converged = true;
  result.classifier = trainer.model();
  return result;
}

Eigen::MatrixXd predict_unknown(const Classifier& classifier,
                                const NodeEmbeddings& embeddings, const KnownMask& mask) {
  if (static_cast<std::size_t>(embeddings.vectors.cols()) != classifier.input_dim()) {
    throw UsageError("embedding dimension " + std::to_string(embeddings.vectors.cols()) +
                     " does not match the classifier's " +
                     std::to_string(classifier.input_dim()));
  }
  if (mask.size() != static_cast<std::size_t>(embeddings.vectors.rows())) {
    throw UsageError("mask does not match the embedding table");
  }
  if (mask.unknown.empty()) {
    return Eigen::MatrixXd(0, static_cast<Index>(classifier.num_categories()));
  }
  const std::vector<Index> unknown(mask.unknown.begin(), mask.unknown.end());
  return classifier.predict_proba(embeddings.vectors(unknown, Eigen::all));
}

KnowPropEmbeddingResult knowprop_embedding(const Eigen::MatrixXd& P,
                                           const LabelState& initial,
                                           const KnowPropEmbeddingConfig& cfg) {
  const Index d = P.rows();
  if (initial.n.rows() != d || static_cast<Index>(initial.mask.size()) != d) {
    throw UsageError("label state does not match the partial-correlation matrix");
  }
  const auto categories = initial.num_categories();
  std::vector<int> labels(static_cast<std::size_t>(d), 0);
  for (std::size_t k : initial.mask.known) {
    Index best = 0;
    initial.n.row(static_cast<Index>(k)).maxCoeff(&best);
    labels[k] = static_cast<int>(best);
  }

  const TransitionMatrix pm = build_maxnorm(P, cfg.transition);
  Adjacency adjacency = (P.array() > 0.0).matrix();
  adjacency.diagonal().setConstant(false);

  KnowPropEmbeddingResult out;
  const WalkCorpus corpus = random_walks(pm, adjacency, cfg.embedding);
  out.embeddings = train_embeddings(corpus, static_cast<std::size_t>(d), cfg.embedding);
  FitResult fit = fit_classifier(out.embeddings, initial.mask, labels, categories,
                                 cfg.classifier);
  out.report = std::move(fit.report);
  out.state = initial;
  if (!initial.mask.unknown.empty()) {
    const std::vector<Index> unknown(initial.mask.unknown.begin(), initial.mask.unknown.end());
    out.state.n(unknown, Eigen::all) =
        predict_unknown(fit.classifier, out.embeddings, initial.mask);
  }
  return out;
}

}  // namespace cikp
