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

#include "cikp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cikp/error.hpp"
#include "cikp/transition.hpp"
#include "json.hpp"

namespace cikp {
namespace {

using nlohmann::json;

constexpr std::uint64_t kSubsetTag = 0x53554253u;
constexpr std::uint64_t kMaskTag = 0x4d41534bu;
constexpr std::uint64_t kEmbedTag = 0x454d4244u;
constexpr std::uint64_t kClassifierTag = 0x434c4153u;

std::uint64_t stream_for(EvaluationSplit split) {
  return split == EvaluationSplit::kValidation ? kValidationStream : kTestStream;
}

// Strict object reader: unknown keys are usage errors.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw UsageError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw UsageError(where_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw UsageError("unknown key '" + it.key() + "' in " + where_);
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string_view name_of(ClassifierModel m) {
  return m == ClassifierModel::kMLP ? "mlp" : "logistic";
}

std::string_view name_of(ClassifierLoss l) {
  return l == ClassifierLoss::kSquared ? "squared" : "cross-entropy";
}

std::string_view name_of(Normalization n) {
  switch (n) {
    case Normalization::kNone: return "none";
    case Normalization::kMinMax: return "minmax";
    case Normalization::kMeanCenter: return "mean";
  }
  return "none";
}

std::string_view name_of(CorrelationMode m) {
  return m == CorrelationMode::kSpearman ? "spearman" : "pearson";
}

json params_to_json(const HyperParams& p) {
  return {{"alpha", p.alpha},
          {"lambda", p.lambda},
          {"regularizer", std::string(to_string(p.regularizer))},
          {"embedding_dim", p.embedding_dim}};
}

HyperParams params_from_json(const json& j, const std::string& where) {
  HyperParams p;
  ObjectReader r(j, where);
  r.get("alpha", p.alpha);
  r.get("lambda", p.lambda);
  std::string reg(to_string(p.regularizer));
  r.get("regularizer", reg);
  p.regularizer = regularizer_from_string(reg);
  r.get("embedding_dim", p.embedding_dim);
  r.finish();
  return p;
}

json level_to_json(const MaskingLevel& l) {
  if (l.is_count) return {{"count", l.count}};
  return l.fraction;
}

MaskingLevel level_from_json(const json& j) {
  if (j.is_number()) return MaskingLevel::of_fraction(j.get<double>());
  ObjectReader r(j, "masking entry");
  double fraction = -1.0;
  long long count = -1;
  r.get("fraction", fraction);
  r.get("count", count);
  r.finish();
  if ((fraction >= 0.0) == (count >= 0)) {
    throw UsageError("masking entry needs exactly one of 'fraction' or 'count'");
  }
  if (count >= 0) return MaskingLevel::of_count(static_cast<std::size_t>(count));
  return MaskingLevel::of_fraction(fraction);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kNode2Vec: return "node2vec";
    case Method::kIterativeExp: return "iterative-exp";
    case Method::kIterativePos: return "iterative-pos";
    case Method::kIterativePosNeg: return "iterative-posneg";
    case Method::kAnalyticalExp: return "analytical-exp";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::kNode2Vec, Method::kIterativeExp, Method::kIterativePos,
                   Method::kIterativePosNeg, Method::kAnalyticalExp}) {
    if (name == to_string(m)) return m;
  }
  throw UsageError("unknown method '" + std::string(name) + "'");
}

Dataset load_dataset_ref(const DatasetRef& ref) {
  if (ref.format == "synthetic") return make_synthetic(ref.synthetic);
  if (ref.path.empty()) throw UsageError("dataset format '" + ref.format + "' needs a path");
  if (ref.format == "cora") return load_cora(ref.path);
  if (ref.format == "pubmed") return load_pubmed(ref.path);
  if (ref.format == "json") return load_dataset(ref.path);
  throw UsageError("unknown dataset format '" + ref.format + "'");
}

std::string MaskingLevel::label() const {
  if (is_count) return "n=" + std::to_string(count);
  const double pct = fraction * 100.0;
  if (std::abs(pct - std::round(pct)) < 1e-9) {
    return std::to_string(static_cast<long long>(std::llround(pct))) + "%";
  }
  return csv_number(fraction);
}

KnownMask MaskingLevel::draw(std::size_t num_nodes, std::uint64_t seed) const {
  return is_count ? mask_labels_count(num_nodes, count, seed)
                  : mask_labels_fraction(num_nodes, fraction, seed);
}

void ExperimentSpec::validate() const {
  if (runs < 1) throw UsageError("runs must be >= 1");
  if (methods.empty()) throw UsageError("methods must not be empty");
  if (masking.empty()) throw UsageError("masking levels must not be empty");
  if (subset_size == 1) throw UsageError("subset_size must be 0 (all nodes) or >= 2");
  for (const auto& l : masking) {
    if (l.is_count) {
      if (l.count < 1) throw UsageError("masking count must be >= 1");
    } else if (!(l.fraction > 0.0 && l.fraction < 1.0)) {
      throw UsageError("masking fraction must lie in (0, 1)");
    }
  }
  if (tune) {
    if (validation_runs < 1) throw UsageError("validation_runs must be >= 1 when tuning");
    if (grid.alpha.empty() || grid.lambda.empty() || grid.regularizer.empty() ||
        grid.embedding_dim.empty()) {
      throw UsageError("hyperparameter grid axes must not be empty");
    }
  }
  auto check_params = [](double alpha, double lambda, std::size_t dim) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw UsageError("alpha must be >= 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("lambda must lie in [0, 1]");
    if (dim < 1) throw UsageError("embedding_dim must be >= 1");
  };
  check_params(fixed.alpha, fixed.lambda, fixed.embedding_dim);
  for (double a : grid.alpha) check_params(a, fixed.lambda, 1);
  for (double l : grid.lambda) check_params(fixed.alpha, l, 1);
  for (std::size_t d : grid.embedding_dim) check_params(fixed.alpha, fixed.lambda, d);
  if (sparsity_threshold < 0.0) throw UsageError("sparsity_threshold must be >= 0");
  propagation.validate();
  embedding.validate();
}

ExperimentSpec ExperimentSpec::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("spec is not valid JSON: ") + e.what());
  }
  ExperimentSpec s;
  ObjectReader r(j, "spec");

  if (const json* d = r.child("dataset")) {
    ObjectReader dr(*d, "dataset");
    dr.get("format", s.dataset.format);
    dr.get("path", s.dataset.path);
    if (const json* syn = dr.child("synthetic")) {
      ObjectReader sr(*syn, "dataset.synthetic");
      sr.get("nodes", s.dataset.synthetic.nodes);
      sr.get("categories", s.dataset.synthetic.categories);
      sr.get("words", s.dataset.synthetic.words);
      sr.get("signal", s.dataset.synthetic.signal);
      sr.get("noise", s.dataset.synthetic.noise);
      sr.get("seed", s.dataset.synthetic.seed);
      sr.finish();
    }
    dr.finish();
  }
  r.get("subset_size", s.subset_size);
  r.get("stratified", s.stratified);
  std::string resample = s.resample_per_run ? "per-run" : "once";
  r.get("resample", resample);
  if (resample == "per-run") {
    s.resample_per_run = true;
  } else if (resample == "once") {
    s.resample_per_run = false;
  } else {
    throw UsageError("resample must be 'per-run' or 'once'");
  }
  std::string norm(name_of(s.normalization));
  r.get("normalization", norm);
  s.normalization = normalization_from_string(norm);
  std::string corr(name_of(s.correlation));
  r.get("correlation", corr);
  s.correlation = correlation_mode_from_string(corr);
  r.get("sparsity_threshold", s.sparsity_threshold);

  if (const json* m = r.child("masking")) {
    if (!m->is_array()) throw UsageError("masking must be an array");
    s.masking.clear();
    for (const auto& e : *m) s.masking.push_back(level_from_json(e));
  }
  if (const json* m = r.child("methods")) {
    if (!m->is_array()) throw UsageError("methods must be an array");
    s.methods.clear();
    for (const auto& e : *m) {
      if (!e.is_string()) throw UsageError("method names must be strings");
      s.methods.push_back(method_from_string(e.get<std::string>()));
    }
  }
  r.get("runs", s.runs);
  r.get("validation_runs", s.validation_runs);
  r.get("tune", s.tune);
  if (const json* g = r.child("grid")) {
    ObjectReader gr(*g, "grid");
    gr.get("alpha", s.grid.alpha);
    gr.get("lambda", s.grid.lambda);
    std::vector<std::string> regs;
    for (auto reg : s.grid.regularizer) regs.emplace_back(to_string(reg));
    gr.get("regularizer", regs);
    s.grid.regularizer.clear();
    for (const auto& reg : regs) s.grid.regularizer.push_back(regularizer_from_string(reg));
    gr.get("embedding_dim", s.grid.embedding_dim);
    gr.finish();
  }
  if (const json* f = r.child("fixed")) s.fixed = params_from_json(*f, "fixed");
  std::string split = s.split == EvaluationSplit::kTest ? "test" : "validation";
  r.get("split", split);
  if (split == "test") {
    s.split = EvaluationSplit::kTest;
  } else if (split == "validation") {
    s.split = EvaluationSplit::kValidation;
  } else {
    throw UsageError("split must be 'test' or 'validation'");
  }
  if (const json* p = r.child("propagation")) {
    ObjectReader pr(*p, "propagation");
    pr.get("epsilon", s.propagation.epsilon);
    pr.get("max_iters", s.propagation.max_iters);
    pr.finish();
  }
  if (const json* e = r.child("embedding")) {
    ObjectReader er(*e, "embedding");
    er.get("walk_length", s.embedding.walk_length);
    er.get("walks_per_node", s.embedding.walks_per_node);
    er.get("p", s.embedding.return_param);
    er.get("q", s.embedding.inout_param);
    er.get("window", s.embedding.window);
    er.get("negative_samples", s.embedding.negative_samples);
    er.get("epochs", s.embedding.epochs);
    er.get("learning_rate", s.embedding.learning_rate);
    er.finish();
  }
  if (const json* c = r.child("classifier")) {
    ObjectReader cr(*c, "classifier");
    std::string model(name_of(s.classifier.model));
    cr.get("model", model);
    s.classifier.model = classifier_model_from_string(model);
    std::string loss(name_of(s.classifier.loss));
    cr.get("loss", loss);
    if (loss == "cross-entropy") {
      s.classifier.loss = ClassifierLoss::kCrossEntropy;
    } else if (loss == "squared") {
      s.classifier.loss = ClassifierLoss::kSquared;
    } else {
      throw UsageError("classifier.loss must be 'cross-entropy' or 'squared'");
    }
    cr.get("hidden_units", s.classifier.hidden_units);
    cr.get("learning_rate", s.classifier.learning_rate);
    cr.get("l2", s.classifier.l2);
    cr.get("max_epochs", s.classifier.max_epochs);
    cr.get("patience", s.classifier.patience);
    cr.get("holdout_fraction", s.classifier.holdout_fraction);
    cr.get("tolerance", s.classifier.tolerance);
    cr.finish();
  }
  r.get("seed", s.seed);
  r.get("threads", s.threads);
  r.finish();
  s.validate();
  return s;
}

std::string ExperimentSpec::to_json() const {
  json masking_j = json::array();
  for (const auto& l : masking) masking_j.push_back(level_to_json(l));
  json methods_j = json::array();
  for (Method m : methods) methods_j.push_back(std::string(cikp::to_string(m)));
  json regs = json::array();
  for (auto reg : grid.regularizer) regs.push_back(std::string(cikp::to_string(reg)));
  json j = {
      {"dataset",
       {{"format", dataset.format},
        {"path", dataset.path},
        {"synthetic",
         {{"nodes", dataset.synthetic.nodes},
          {"categories", dataset.synthetic.categories},
          {"words", dataset.synthetic.words},
          {"signal", dataset.synthetic.signal},
          {"noise", dataset.synthetic.noise},
          {"seed", dataset.synthetic.seed}}}}},
      {"subset_size", subset_size},
      {"stratified", stratified},
      {"resample", resample_per_run ? "per-run" : "once"},
      {"normalization", std::string(name_of(normalization))},
      {"correlation", std::string(name_of(correlation))},
      {"sparsity_threshold", sparsity_threshold},
      {"masking", masking_j},
      {"methods", methods_j},
      {"runs", runs},
      {"validation_runs", validation_runs},
      {"tune", tune},
      {"grid",
       {{"alpha", grid.alpha},
        {"lambda", grid.lambda},
        {"regularizer", regs},
        {"embedding_dim", grid.embedding_dim}}},
      {"fixed", params_to_json(fixed)},
      {"split", split == EvaluationSplit::kTest ? "test" : "validation"},
      {"propagation",
       {{"epsilon", propagation.epsilon}, {"max_iters", propagation.max_iters}}},
      {"embedding",
       {{"walk_length", embedding.walk_length},
        {"walks_per_node", embedding.walks_per_node},
        {"p", embedding.return_param},
        {"q", embedding.inout_param},
        {"window", embedding.window},
        {"negative_samples", embedding.negative_samples},
        {"epochs", embedding.epochs},
        {"learning_rate", embedding.learning_rate}}},
      {"classifier",
       {{"model", std::string(name_of(classifier.model))},
        {"loss", std::string(name_of(classifier.loss))},
        {"hidden_units", classifier.hidden_units},
        {"learning_rate", classifier.learning_rate},
        {"l2", classifier.l2},
        {"max_epochs", classifier.max_epochs},
        {"patience", classifier.patience},
        {"holdout_fraction", classifier.holdout_fraction},
        {"tolerance", classifier.tolerance}}},
      {"seed", seed},
      {"threads", threads},
  };
  return j.dump(2);
}

void score(RunRecord& record) {
  record.unknown = record.predictions.size();
  record.predicted = 0;
  record.correct = 0;
  for (const auto& p : record.predictions) {
    if (p.predicted < 0) continue;
    ++record.predicted;
    if (p.predicted == p.truth) ++record.correct;
  }
  record.coverage = record.unknown == 0 ? 0.0
                                        : static_cast<double>(record.predicted) /
                                              static_cast<double>(record.unknown);
  record.accuracy = record.predicted == 0 ? 0.0
                                          : static_cast<double>(record.correct) /
                                                static_cast<double>(record.predicted);
}

RunProblem make_problem(const Dataset& full, const ExperimentSpec& spec,
                        const MaskingLevel& level, std::uint64_t stream, std::size_t run) {
  RunProblem problem;
  problem.seed = derive_seed(spec.seed, stream, run);
  const std::size_t size = spec.subset_size;
  if (size == 0 || size >= full.num_nodes()) {
    problem.subset = full;
  } else {
    const std::uint64_t subset_seed = spec.resample_per_run
                                          ? derive_seed(problem.seed, kSubsetTag, 0)
                                          : derive_seed(spec.seed, kSubsetTag, 0);
    problem.subset = subsample(full, size, subset_seed, spec.stratified);
  }
  problem.subset = normalize(problem.subset, spec.normalization);
  problem.mask = level.draw(problem.subset.num_nodes(), derive_seed(problem.seed, kMaskTag, 0));
  return problem;
}

Eigen::MatrixXd recover_for(const RunProblem& problem, const ExperimentSpec& spec,
                            double lambda) {
  RecoveryConfig cfg;
  cfg.correlation = spec.correlation;
  cfg.shrinkage = lambda;
  cfg.sparsity_threshold = spec.sparsity_threshold;
  return recover(problem.subset.X, cfg).P;
}

LabelState solve(const RunProblem& problem, const Eigen::MatrixXd& P, Method method,
                 const HyperParams& params, const ExperimentSpec& spec, int* iterations,
                 bool* converged) {
  const LabelState initial =
      init_state(problem.mask, problem.subset.labels, problem.subset.num_categories());
  if (method == Method::kNode2Vec) {
    KnowPropEmbeddingConfig cfg;
    cfg.transition.alpha = params.alpha;
    cfg.embedding = spec.embedding;
    cfg.embedding.dimension = params.embedding_dim;
    cfg.embedding.seed = derive_seed(problem.seed, kEmbedTag, 0);
    cfg.classifier = spec.classifier;
    cfg.classifier.seed = derive_seed(problem.seed, kClassifierTag, 0);
    auto result = knowprop_embedding(P, initial, cfg);
    if (iterations) *iterations = static_cast<int>(result.report.epochs_run);
    if (converged) *converged = result.report.converged;
    return std::move(result.state);
  }
  KnowPropConfig cfg;
  cfg.transition.alpha = params.alpha;
  cfg.propagation = spec.propagation;
  cfg.propagation.regularizer = Regularizer::kNone;
  switch (method) {
    case Method::kIterativeExp: cfg.method = PropagationMethod::kIterativeExp; break;
    case Method::kAnalyticalExp: cfg.method = PropagationMethod::kAnalyticalExp; break;
    case Method::kIterativePos:
      cfg.method = PropagationMethod::kIterativePos;
      cfg.propagation.regularizer = params.regularizer;
      break;
    case Method::kIterativePosNeg:
      cfg.method = PropagationMethod::kIterativePosNeg;
      cfg.propagation.regularizer = params.regularizer;
      break;
    case Method::kNode2Vec: break;
  }
  auto result = knowprop(P, initial, cfg);
  if (iterations) *iterations = result.iterations;
  if (converged) *converged = result.converged;
  return std::move(result.state);
}

RunRecord evaluate(const RunProblem& problem, const Eigen::MatrixXd& P, Method method,
                   const HyperParams& params, const ExperimentSpec& spec,
                   const SelectionStrategy& selection) {
  RunRecord record;
  record.seed = problem.seed;
  record.node_ids = problem.subset.node_ids;
  try {
    const LabelState state =
        solve(problem, P, method, params, spec, &record.iterations, &record.converged);
    for (const auto& pred : select(state, selection)) {
      record.predictions.push_back(
          {pred.node, problem.subset.labels[pred.node], pred.category, pred.confidence});
    }
    score(record);
  } catch (const std::exception& e) {
    record.error = e.what();
    record.predictions.clear();
    record.accuracy = 0.0;
    record.coverage = 0.0;
  }
  return record;
}

RunRecord run_cell(const Dataset& full, const ExperimentSpec& spec, Method method,
                   const MaskingLevel& level, const HyperParams& params,
                   std::uint64_t stream, std::size_t run) {
  RunRecord record;
  try {
    const RunProblem problem = make_problem(full, spec, level, stream, run);
    record = evaluate(problem, recover_for(problem, spec, params.lambda), method, params,
                      spec);
  } catch (const std::exception& e) {
    record.seed = derive_seed(spec.seed, stream, run);
    record.error = e.what();
  }
  record.run = run;
  return record;
}

std::vector<HyperParams> grid_points(Method method, const HyperGrid& grid,
                                     const HyperParams& base) {
  const bool uses_alpha = method != Method::kIterativePos && method != Method::kIterativePosNeg;
  const bool uses_reg = method == Method::kIterativePos || method == Method::kIterativePosNeg;
  const bool uses_dim = method == Method::kNode2Vec;
  const std::vector<double> alphas = uses_alpha ? grid.alpha : std::vector<double>{base.alpha};
  const std::vector<Regularizer> regs =
      uses_reg ? grid.regularizer : std::vector<Regularizer>{base.regularizer};
  const std::vector<std::size_t> dims =
      uses_dim ? grid.embedding_dim : std::vector<std::size_t>{base.embedding_dim};
  std::vector<HyperParams> out;
  for (double lambda : grid.lambda) {
    for (double alpha : alphas) {
      for (Regularizer reg : regs) {
        for (std::size_t dim : dims) out.push_back({alpha, lambda, reg, dim});
      }
    }
  }
  if (out.empty()) throw UsageError("hyperparameter grid is empty");
  return out;
}

namespace {

// Runs every (run, params) pair, building each run's problem once and each
// recovery once per distinct lambda.
std::vector<std::vector<RunRecord>> run_matrix(const Dataset& full, const ExperimentSpec& spec,
                                               const std::vector<Method>& methods,
                                               const std::vector<HyperParams>& params,
                                               const MaskingLevel& level,
                                               std::uint64_t stream, std::size_t runs,
                                               std::vector<double>* elapsed_ms) {
  const std::size_t k = params.size();
  std::vector<std::vector<RunRecord>> out(k, std::vector<RunRecord>(runs));
  if (elapsed_ms) elapsed_ms->assign(k * runs, 0.0);
  parallel_for(runs, spec.threads, [&](std::size_t run) {
    RunProblem problem;
    std::string setup_error;
    try {
      problem = make_problem(full, spec, level, stream, run);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    std::map<double, Eigen::MatrixXd> recovered;
    std::map<double, std::string> recovery_errors;
    for (std::size_t i = 0; i < k; ++i) {
      const auto start = std::chrono::steady_clock::now();
      RunRecord record;
      if (!setup_error.empty()) {
        record.seed = derive_seed(spec.seed, stream, run);
        record.error = setup_error;
      } else {
        const double lambda = params[i].lambda;
        if (!recovered.count(lambda) && !recovery_errors.count(lambda)) {
          try {
            recovered.emplace(lambda, recover_for(problem, spec, lambda));
          } catch (const std::exception& e) {
            recovery_errors.emplace(lambda, e.what());
          }
        }
        if (auto it = recovery_errors.find(lambda); it != recovery_errors.end()) {
          record.seed = problem.seed;
          record.error = it->second;
        } else {
          record = evaluate(problem, recovered.at(lambda), methods[i], params[i], spec);
        }
      }
      record.run = run;
      out[i][run] = std::move(record);
      if (elapsed_ms) {
        (*elapsed_ms)[i * runs + run] = std::chrono::duration<double, std::milli>(
                                            std::chrono::steady_clock::now() - start)
                                            .count();
      }
    }
  });
  return out;
}

double selection_score(const std::vector<RunRecord>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += r.failed() ? 0.0 : r.accuracy;
  return s / static_cast<double>(runs.size());
}

}  // namespace

GridSearchResult grid_search(const Dataset& full, const ExperimentSpec& spec, Method method,
                             const MaskingLevel& level) {
  if (spec.validation_runs < 1) throw UsageError("validation_runs must be >= 1");
  GridSearchResult result;
  result.method = method;
  result.level = level.label();
  const std::vector<HyperParams> points = grid_points(method, spec.grid, spec.fixed);
  const std::vector<Method> methods(points.size(), method);
  const auto records = run_matrix(full, spec, methods, points, level, kValidationStream,
                                  spec.validation_runs, nullptr);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double s = selection_score(records[i]);
    result.points.push_back({points[i], s});
    if (s > best) {
      best = s;
      result.best = points[i];
    }
  }
  return result;
}

void summarize(CellReport& cell) {
  std::vector<double> acc;
  cell.failed = 0;
  for (const auto& r : cell.runs) {
    if (r.failed()) {
      ++cell.failed;
    } else {
      acc.push_back(r.accuracy);
    }
  }
  cell.mean = mean_of(acc);
  cell.stddev = sample_stddev(acc);
}

const CellReport* ExperimentReport::find(Method method, const std::string& level) const {
  for (const auto& c : cells) {
    if (c.method == method && c.level == level) return &c;
  }
  return nullptr;
}

std::string ExperimentReport::to_json(bool include_timing, bool include_predictions) const {
  json j;
  j["format"] = "cikp-report";
  j["version"] = 1;
  j["spec"] = json::parse(spec.to_json());
  json gs = json::array();
  for (const auto& g : grid_search) {
    json pts = json::array();
    for (const auto& p : g.points) {
      pts.push_back({{"params", params_to_json(p.params)}, {"mean_accuracy", p.mean_accuracy}});
    }
    gs.push_back({{"method", std::string(cikp::to_string(g.method))},
                  {"level", g.level},
                  {"best", params_to_json(g.best)},
                  {"points", pts}});
  }
  j["grid_search"] = gs;
  json cells_j = json::array();
  for (const auto& c : cells) {
    json runs_j = json::array();
    for (const auto& r : c.runs) {
      json rj = {{"run", r.run},         {"seed", r.seed},
                 {"accuracy", r.accuracy}, {"coverage", r.coverage},
                 {"unknown", r.unknown},   {"predicted", r.predicted},
                 {"correct", r.correct},   {"iterations", r.iterations},
                 {"converged", r.converged}};
      if (r.failed()) rj["error"] = r.error;
      if (include_predictions) {
        json preds = json::array();
        for (const auto& p : r.predictions) {
          preds.push_back({r.node_ids.at(p.node), p.truth, p.predicted, p.confidence});
        }
        rj["predictions"] = preds;
      }
      runs_j.push_back(rj);
    }
    json cj = {{"method", std::string(cikp::to_string(c.method))},
               {"level", c.level},
               {"params", params_to_json(c.params)},
               {"mean", c.mean},
               {"stddev", c.stddev},
               {"failed", c.failed},
               {"runs", runs_j}};
    if (include_timing) cj["runtime_ms"] = c.runtime_ms;
    cells_j.push_back(cj);
  }
  j["cells"] = cells_j;
  return j.dump(2);
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "method,level,mean,stddev,runs,failed,alpha,lambda,regularizer,embedding_dim\n";
  for (const auto& c : cells) {
    os << cikp::to_string(c.method) << ',' << c.level << ',' << csv_number(c.mean) << ','
       << csv_number(c.stddev) << ',' << c.runs.size() << ',' << c.failed << ','
       << csv_number(c.params.alpha) << ',' << csv_number(c.params.lambda) << ','
       << cikp::to_string(c.params.regularizer) << ',' << c.params.embedding_dim << '\n';
  }
  return os.str();
}

ExperimentReport compare_methods(const Dataset& full, const ExperimentSpec& spec) {
  spec.validate();
  full.validate();
  ExperimentReport report;
  report.spec = spec;
  for (const auto& level : spec.masking) {
    std::vector<HyperParams> chosen;
    for (Method m : spec.methods) {
      if (spec.tune) {
        report.grid_search.push_back(grid_search(full, spec, m, level));
        chosen.push_back(report.grid_search.back().best);
      } else {
        chosen.push_back(spec.fixed);
      }
    }
    std::vector<double> elapsed;
    auto records = run_matrix(full, spec, spec.methods, chosen, level,
                              stream_for(spec.split), spec.runs, &elapsed);
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
      CellReport cell;
      cell.method = spec.methods[i];
      cell.level = level.label();
      cell.params = chosen[i];
      cell.runs = std::move(records[i]);
      for (std::size_t r = 0; r < spec.runs; ++r) cell.runtime_ms += elapsed[i * spec.runs + r];
      summarize(cell);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::vector<MaskSweepPoint> masking_sweep(const Dataset& full, const ExperimentSpec& spec,
                                          Method method,
                                          const std::vector<std::size_t>& counts) {
  spec.validate();
  if (counts.empty()) throw UsageError("masking sweep needs at least one count");
  const std::size_t nodes =
      spec.subset_size == 0 ? full.num_nodes() : std::min(spec.subset_size, full.num_nodes());
  for (std::size_t c : counts) {
    if (c < 1 || c >= nodes) {
      throw UsageError("masked count " + std::to_string(c) + " must lie in [1, " +
                       std::to_string(nodes - 1) + "]");
    }
  }
  std::vector<MaskSweepPoint> out;
  for (std::size_t c : counts) {
    const auto records = run_matrix(full, spec, {method}, {spec.fixed},
                                    MaskingLevel::of_count(c), stream_for(spec.split),
                                    spec.runs, nullptr);
    CellReport cell;
    cell.runs = records[0];
    summarize(cell);
    out.push_back({c, cell.mean, cell.stddev, cell.failed});
  }
  return out;
}

std::vector<ThresholdPoint> threshold_sweep(const Dataset& full, const ExperimentSpec& spec,
                                            Method method, const MaskingLevel& level,
                                            const std::vector<double>& thresholds,
                                            ThresholdScale scale) {
  spec.validate();
  if (thresholds.empty()) throw UsageError("threshold sweep needs at least one threshold");
  const double inv_c = 1.0 / static_cast<double>(std::max<std::size_t>(1, full.num_categories()));
  for (double t : thresholds) {
    const bool ok = scale == ThresholdScale::kRelative
                        ? (t >= 0.0 && t <= 1.0)
                        : (t >= inv_c - 1e-12 && t <= 1.0);
    if (!ok) {
      throw UsageError(scale == ThresholdScale::kRelative
                           ? "relative thresholds must lie in [0, 1]"
                           : "absolute thresholds must lie in [1/C, 1]");
    }
  }
  const auto records = run_matrix(full, spec, {method}, {spec.fixed}, level,
                                  stream_for(spec.split), spec.runs, nullptr)[0];
  std::vector<ThresholdPoint> out;
  for (double t : thresholds) {
    ThresholdPoint pt;
    pt.threshold = t;
    std::size_t unknown = 0;
    std::size_t correct = 0;
    for (const auto& r : records) {
      if (r.failed() || r.predictions.empty()) continue;
      double max_conf = 0.0;
      for (const auto& p : r.predictions) max_conf = std::max(max_conf, p.confidence);
      const double thr =
          scale == ThresholdScale::kRelative ? inv_c + t * (max_conf - inv_c) : t;
      for (const auto& p : r.predictions) {
        ++unknown;
        if (p.confidence >= thr - 1e-12) {
          ++pt.predicted;
          if (p.predicted == p.truth) ++correct;
        }
      }
    }
    pt.coverage = unknown == 0 ? 0.0
                               : static_cast<double>(pt.predicted) / static_cast<double>(unknown);
    pt.accuracy = pt.predicted == 0
                      ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(pt.predicted);
    out.push_back(pt);
  }
  return out;
}

std::string mask_sweep_to_csv(Method method, const std::vector<MaskSweepPoint>& pts) {
  std::ostringstream os;
  os << "method,masked,mean,stddev,failed\n";
  for (const auto& p : pts) {
    os << to_string(method) << ',' << p.masked << ',' << csv_number(p.mean) << ','
       << csv_number(p.stddev) << ',' << p.failed << '\n';
  }
  return os.str();
}

std::string mask_sweep_to_json(Method method, const std::vector<MaskSweepPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) {
    arr.push_back({{"masked", p.masked}, {"mean", p.mean}, {"stddev", p.stddev},
                   {"failed", p.failed}});
  }
  return json{{"format", "cikp-mask-sweep"}, {"method", std::string(to_string(method))},
              {"points", arr}}
      .dump(2);
}

std::string threshold_sweep_to_csv(Method method, const std::vector<ThresholdPoint>& pts) {
  std::ostringstream os;
  os << "method,threshold,coverage,accuracy,predicted\n";
  for (const auto& p : pts) {
    os << to_string(method) << ',' << csv_number(p.threshold) << ','
       << csv_number(p.coverage) << ',' << csv_number(p.accuracy) << ',' << p.predicted
       << '\n';
  }
  return os.str();
}

std::string threshold_sweep_to_json(Method method, const std::vector<ThresholdPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) {
    arr.push_back({{"threshold", p.threshold}, {"coverage", p.coverage},
                   {"accuracy", p.accuracy}, {"predicted", p.predicted}});
  }
  return json{{"format", "cikp-threshold-sweep"},
              {"method", std::string(to_string(method))},
              {"points", arr}}
      .dump(2);
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cikp
