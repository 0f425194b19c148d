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

// Experiment orchestration: subsample -> normalize -> recover P -> mask ->
// propagate (or embed) -> select -> score, repeated over seeded runs.
//
// Seeds: every run draws its subsample and mask from
// derive_seed(master, stream, run), where validation runs use stream
// kValidationStream and test runs kTestStream, so the two never share a
// seed. Runs with the same index see the same subsample and mask for every
// method, which keeps method comparisons paired.

#ifndef CIKP_HARNESS_HPP_
#define CIKP_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cikp/cigraph.hpp"
#include "cikp/dataset.hpp"
#include "cikp/embed.hpp"
#include "cikp/propagate.hpp"
#include "cikp/seed.hpp"

namespace cikp {

enum class Method {
  kNode2Vec,
  kIterativeExp,
  kIterativePos,
  kIterativePosNeg,
  kAnalyticalExp,
};

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

inline constexpr std::uint64_t kValidationStream = 1;
inline constexpr std::uint64_t kTestStream = 2;

struct DatasetRef {
  std::string format = "synthetic";  // cora | pubmed | json | synthetic
  std::string path;
  SyntheticSpec synthetic;
};

Dataset load_dataset_ref(const DatasetRef& ref);

struct MaskingLevel {
  bool is_count = false;
  double fraction = 0.2;
  std::size_t count = 0;

  static MaskingLevel of_fraction(double f) { return {false, f, 0}; }
  static MaskingLevel of_count(std::size_t c) { return {true, 0.0, c}; }
  std::string label() const;
  KnownMask draw(std::size_t num_nodes, std::uint64_t seed) const;
};

struct HyperParams {
  double alpha = 2.0;
  double lambda = 0.1;
  Regularizer regularizer = Regularizer::kKL;
  std::size_t embedding_dim = 64;
};

struct HyperGrid {
  std::vector<double> alpha{0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> lambda{0.05, 0.1, 0.2, 0.4};
  std::vector<Regularizer> regularizer{Regularizer::kKL, Regularizer::kWasserstein,
                                       Regularizer::kNone};
  std::vector<std::size_t> embedding_dim{64};
};

enum class EvaluationSplit { kTest, kValidation };

struct ExperimentSpec {
  DatasetRef dataset;
  std::size_t subset_size = 300;
  bool stratified = false;
  bool resample_per_run = true;  // false: one subsample shared by all runs
  Normalization normalization = Normalization::kNone;
  CorrelationMode correlation = CorrelationMode::kPearson;
  double sparsity_threshold = 0.0;
  std::vector<MaskingLevel> masking{MaskingLevel::of_fraction(0.2),
                                    MaskingLevel::of_fraction(0.4),
                                    MaskingLevel::of_fraction(0.6)};
  std::vector<Method> methods{Method::kNode2Vec, Method::kIterativeExp,
                              Method::kIterativePos, Method::kIterativePosNeg,
                              Method::kAnalyticalExp};
  std::size_t runs = 50;
  std::size_t validation_runs = 10;
  // When true, each (method, level) cell is tuned over `grid` on validation
  // runs; otherwise `fixed` is used everywhere.
  bool tune = true;
  HyperGrid grid;
  HyperParams fixed;
  EvaluationSplit split = EvaluationSplit::kTest;
  PropagationConfig propagation;
  EmbeddingConfig embedding;
  ClassifierConfig classifier;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const;
  static ExperimentSpec from_json(std::string_view text);
  std::string to_json() const;
};

struct NodePrediction {
  std::size_t node = 0;
  int truth = -1;
  int predicted = -1;  // -1: abstained
  double confidence = 0.0;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double coverage = 1.0;
  std::size_t unknown = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  int iterations = 0;
  bool converged = true;
  std::vector<std::string> node_ids;  // subset node ids, for predictions
  std::vector<NodePrediction> predictions;
  std::string error;  // non-empty when the run failed

  bool failed() const { return !error.empty(); }
};

// Scoring of a set of predictions: accuracy is correct / unknown when
// nothing abstains, otherwise correct / predicted alongside coverage.
void score(RunRecord& record);

// One prepared problem instance: the run's subset and mask.
struct RunProblem {
  Dataset subset;
  KnownMask mask;
  std::uint64_t seed = 0;
};

RunProblem make_problem(const Dataset& full, const ExperimentSpec& spec,
                        const MaskingLevel& level, std::uint64_t stream,
                        std::size_t run);

Eigen::MatrixXd recover_for(const RunProblem& problem, const ExperimentSpec& spec,
                            double lambda);

// Propagation output for every node of the problem (known rows included).
LabelState solve(const RunProblem& problem, const Eigen::MatrixXd& P,
                 Method method, const HyperParams& params,
                 const ExperimentSpec& spec, int* iterations = nullptr,
                 bool* converged = nullptr);

RunRecord evaluate(const RunProblem& problem, const Eigen::MatrixXd& P,
                   Method method, const HyperParams& params,
                   const ExperimentSpec& spec,
                   const SelectionStrategy& selection = {});

RunRecord run_cell(const Dataset& full, const ExperimentSpec& spec, Method method,
                   const MaskingLevel& level, const HyperParams& params,
                   std::uint64_t stream, std::size_t run);

struct GridPoint {
  HyperParams params;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  Method method = Method::kAnalyticalExp;
  std::string level;
  HyperParams best;
  std::vector<GridPoint> points;
};

// Grid points that matter for `method`, in nested order
// lambda > alpha > regularizer > embedding_dim.
std::vector<HyperParams> grid_points(Method method, const HyperGrid& grid,
                                     const HyperParams& base);

// Maximizes mean validation accuracy; ties go to the lowest grid index.
GridSearchResult grid_search(const Dataset& full, const ExperimentSpec& spec,
                             Method method, const MaskingLevel& level);

struct CellReport {
  Method method = Method::kAnalyticalExp;
  std::string level;
  HyperParams params;
  std::vector<RunRecord> runs;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t failed = 0;
  double runtime_ms = 0.0;
};

// Mean and sample standard deviation over non-failed runs.
void summarize(CellReport& cell);

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<GridSearchResult> grid_search;
  std::vector<CellReport> cells;

  const CellReport* find(Method method, const std::string& level) const;
  std::string to_json(bool include_timing = true,
                      bool include_predictions = true) const;
  std::string to_csv() const;
};

// Full method x masking-level cross.
ExperimentReport compare_methods(const Dataset& full, const ExperimentSpec& spec);

struct MaskSweepPoint {
  std::size_t masked = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t failed = 0;
};

// Uses spec.fixed hyperparameters and spec.split.
std::vector<MaskSweepPoint> masking_sweep(const Dataset& full,
                                          const ExperimentSpec& spec, Method method,
                                          const std::vector<std::size_t>& counts);

struct ThresholdPoint {
  double threshold = 0.0;  // as requested (relative or absolute)
  double coverage = 0.0;   // predicted / unknown, pooled over runs
  double accuracy = 0.0;   // correct / predicted, pooled over runs
  std::size_t predicted = 0;
};

enum class ThresholdScale {
  kAbsolute,
  // t maps to 1/C + t * (max_conf - 1/C), max_conf being the highest
  // confidence among the run's unknown nodes.
  kRelative,
};

std::vector<ThresholdPoint> threshold_sweep(const Dataset& full,
                                            const ExperimentSpec& spec,
                                            Method method, const MaskingLevel& level,
                                            const std::vector<double>& thresholds,
                                            ThresholdScale scale);

std::string mask_sweep_to_csv(Method method, const std::vector<MaskSweepPoint>& pts);
std::string mask_sweep_to_json(Method method, const std::vector<MaskSweepPoint>& pts);
std::string threshold_sweep_to_csv(Method method,
                                   const std::vector<ThresholdPoint>& pts);
std::string threshold_sweep_to_json(Method method,
                                    const std::vector<ThresholdPoint>& pts);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cikp

#endif  // CIKP_HARNESS_HPP_
