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

#include "cikp/cikp.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <set>
#include <string>
#include <vector>

#include "cikp/cigraph.hpp"
#include "cikp/dataset.hpp"
#include "cikp/embed.hpp"
#include "cikp/error.hpp"
#include "cikp/harness.hpp"
#include "cikp/matrix_io.hpp"
#include "cikp/propagate.hpp"
#include "cikp/transition.hpp"
#include "json.hpp"

#ifndef CIKP_VERSION_STRING
#define CIKP_VERSION_STRING "0.0.0"
#endif

struct cikp_dataset {
  cikp::Dataset ds;
};

struct cikp_matrix {
  cikp::MatrixFile m;
};

namespace {

using nlohmann::json;
using cikp::DataError;
using cikp::UsageError;

thread_local std::string g_last_error;

template <typename F>
cikp_status guard(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return CIKP_OK;
  } catch (const cikp::UsageError& e) {
    g_last_error = e.what();
    return CIKP_ERROR_USAGE;
  } catch (const cikp::DataError& e) {
    g_last_error = e.what();
    return CIKP_ERROR_DATA;
  } catch (const cikp::NumericalError& e) {
    g_last_error = e.what();
    return CIKP_ERROR_NUMERICAL;
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON input: ") + e.what();
    return CIKP_ERROR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CIKP_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CIKP_ERROR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw UsageError(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string(what) + " are not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError(std::string(what) + " must be a JSON object");
  return j;
}

// Typed option access; rejects keys outside `allowed`.
class Options {
 public:
  Options(const char* text, const char* what, std::set<std::string> allowed)
      : j_(parse_options(text, what)), what_(what) {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) {
        throw UsageError("unknown key '" + it.key() + "' in " + what_);
      }
    }
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return fallback;
    try {
      return it->template get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string(what_) + "." + key + " has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }

 private:
  json j_;
  const char* what_;
};

cikp::MatrixKind kind_from(const char* kind) {
  require(kind, "kind");
  return cikp::matrix_kind_from_string(kind);
}

// Problem description shared by propagate and embed.
struct Problem {
  std::vector<std::string> categories;
  std::vector<std::string> node_ids;
  cikp::LabelState state;
};

std::size_t resolve_node(const json& ref, const std::vector<std::string>& ids,
                         const std::map<std::string, std::size_t>& index) {
  if (ref.is_number_integer()) {
    const auto v = ref.get<long long>();
    if (v < 0 || static_cast<std::size_t>(v) >= ids.size()) {
      throw DataError("known node index " + std::to_string(v) + " out of range");
    }
    return static_cast<std::size_t>(v);
  }
  if (ref.is_string()) {
    auto it = index.find(ref.get<std::string>());
    if (it == index.end()) throw DataError("unknown node id '" + ref.get<std::string>() + "'");
    return it->second;
  }
  throw DataError("known.node must be an index or a node id");
}

Problem parse_problem(const char* text, const cikp::MatrixFile& matrix) {
  require(text, "problem_json");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("problem is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("problem must be a JSON object");
  Problem p;
  p.categories = j.at("categories").get<std::vector<std::string>>();
  if (p.categories.empty()) throw DataError("problem needs at least one category");
  const auto d = static_cast<std::size_t>(matrix.data.rows());
  if (j.contains("node_ids")) {
    p.node_ids = j.at("node_ids").get<std::vector<std::string>>();
  } else if (!matrix.node_ids.empty()) {
    p.node_ids = matrix.node_ids;
  } else {
    for (std::size_t i = 0; i < d; ++i) p.node_ids.push_back(std::to_string(i));
  }
  if (j.contains("nodes") && j.at("nodes").get<std::size_t>() != d) {
    throw DataError("problem 'nodes' does not match the matrix size");
  }
  if (p.node_ids.size() != d) throw DataError("node_ids do not match the matrix size");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < d; ++i) index.emplace(p.node_ids[i], i);
  std::map<std::string, std::size_t> cat_index;
  for (std::size_t c = 0; c < p.categories.size(); ++c) cat_index.emplace(p.categories[c], c);

  std::vector<cikp::KnownRow> rows;
  std::vector<std::size_t> known;
  for (const auto& entry : j.at("known")) {
    const std::size_t node = resolve_node(entry.at("node"), p.node_ids, index);
    Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(p.categories.size()));
    if (entry.contains("label") == entry.contains("distribution")) {
      throw DataError("known entry needs exactly one of 'label' or 'distribution'");
    }
    if (entry.contains("label")) {
      auto it = cat_index.find(entry.at("label").get<std::string>());
      if (it == cat_index.end()) {
        throw DataError("unknown category '" + entry.at("label").get<std::string>() + "'");
      }
      dist(static_cast<Eigen::Index>(it->second)) = 1.0;
    } else {
      const auto values = entry.at("distribution").get<std::vector<double>>();
      if (values.size() != p.categories.size()) {
        throw DataError("distribution length does not match the category count");
      }
      for (std::size_t c = 0; c < values.size(); ++c) dist(static_cast<Eigen::Index>(c)) = values[c];
    }
    rows.push_back({node, dist});
    known.push_back(node);
  }
  std::vector<bool> is_known(d, false);
  for (std::size_t k : known) is_known[k] = true;
  std::vector<std::size_t> unknown;
  for (std::size_t i = 0; i < d; ++i) {
    if (!is_known[i]) unknown.push_back(i);
  }
  cikp::KnownMask mask;
  try {
    mask = cikp::KnownMask::from_unknown(d, unknown);
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  try {
    p.state = cikp::init_state(mask, rows, p.categories.size());
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  return p;
}

json predictions_json(const Problem& p, const cikp::LabelState& state,
                      const cikp::SelectionStrategy& selection) {
  json preds = json::array();
  for (const auto& pred : cikp::select(state, selection)) {
    json dist = json::array();
    for (Eigen::Index c = 0; c < state.n.cols(); ++c) {
      dist.push_back(state.n(static_cast<Eigen::Index>(pred.node), c));
    }
    preds.push_back({{"node", pred.node},
                     {"node_id", p.node_ids[pred.node]},
                     {"category", pred.abstained() ? json(nullptr)
                                                   : json(p.categories[static_cast<std::size_t>(pred.category)])},
                     {"confidence", pred.confidence},
                     {"distribution", dist}});
  }
  return preds;
}

cikp::SelectionStrategy selection_from(const Options& opt) {
  cikp::SelectionStrategy s;
  const auto mode = opt.get<std::string>("selection", "argmax");
  if (mode == "argmax") {
    s.mode = cikp::SelectionMode::kArgmax;
  } else if (mode == "threshold") {
    s.mode = cikp::SelectionMode::kConfidenceThreshold;
    if (!opt.has("threshold")) throw UsageError("threshold selection needs 'threshold'");
    s.threshold = opt.get<double>("threshold", 0.0);
  } else {
    throw UsageError("selection must be 'argmax' or 'threshold'");
  }
  return s;
}

// Spec keys that option objects may override.
const std::set<std::string> kSpecOverrides = {"seed",     "threads",    "runs",
                                              "validation_runs", "resample", "split",
                                              "subset_size", "tune",   "fixed"};

cikp::ExperimentSpec spec_with_overrides(const char* spec_json, const json& options) {
  require(spec_json, "spec_json");
  json spec;
  try {
    spec = json::parse(spec_json);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!spec.is_object()) throw DataError("spec must be a JSON object");
  for (auto it = options.begin(); it != options.end(); ++it) {
    if (kSpecOverrides.count(it.key()) && !it->is_null()) spec[it.key()] = *it;
  }
  return cikp::ExperimentSpec::from_json(spec.dump());
}

void check_option_keys(const json& options, const std::set<std::string>& extra,
                       const char* what) {
  for (auto it = options.begin(); it != options.end(); ++it) {
    if (!kSpecOverrides.count(it.key()) && !extra.count(it.key())) {
      throw UsageError("unknown key '" + it.key() + "' in " + what);
    }
  }
}

cikp::Method single_method(const json& options, const cikp::ExperimentSpec& spec) {
  if (options.contains("method")) {
    return cikp::method_from_string(options.at("method").get<std::string>());
  }
  if (spec.methods.size() != 1) {
    throw UsageError("sweeps need 'method' when the spec lists several methods");
  }
  return spec.methods.front();
}

}  // namespace

extern "C" {

const char* cikp_version(void) { return CIKP_VERSION_STRING; }

const char* cikp_last_error(void) { return g_last_error.c_str(); }

void cikp_string_free(char* s) { std::free(s); }

cikp_status cikp_dataset_load(const char* path, const char* format, cikp_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(format, "format");
    require(out, "out");
    *out = nullptr;
    const std::string fmt(format);
    if (fmt != "cora" && fmt != "pubmed" && fmt != "json") {
      throw UsageError("dataset format must be 'cora', 'pubmed' or 'json'");
    }
    cikp::DatasetRef ref;
    ref.format = fmt;
    ref.path = path;
    *out = new cikp_dataset{cikp::load_dataset_ref(ref)};
  });
}

cikp_status cikp_dataset_synthetic(const char* options_json, cikp_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    Options opt(options_json, "synthetic options",
                {"nodes", "categories", "words", "signal", "noise", "seed"});
    cikp::SyntheticSpec s;
    s.nodes = opt.get("nodes", s.nodes);
    s.categories = opt.get("categories", s.categories);
    s.words = opt.get("words", s.words);
    s.signal = opt.get("signal", s.signal);
    s.noise = opt.get("noise", s.noise);
    s.seed = opt.get("seed", s.seed);
    *out = new cikp_dataset{cikp::make_synthetic(s)};
  });
}

void cikp_dataset_free(cikp_dataset* ds) { delete ds; }

cikp_status cikp_dataset_shape(const cikp_dataset* ds, size_t* nodes, size_t* samples,
                               size_t* categories) {
  return guard([&] {
    require(ds, "dataset");
    if (nodes) *nodes = ds->ds.num_nodes();
    if (samples) *samples = ds->ds.num_samples();
    if (categories) *categories = ds->ds.num_categories();
  });
}

cikp_status cikp_dataset_subsample(const cikp_dataset* ds, size_t size, uint64_t seed,
                                   int stratified, cikp_dataset** out) {
  return guard([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = nullptr;
    *out = new cikp_dataset{cikp::subsample(ds->ds, size, seed, stratified != 0)};
  });
}

cikp_status cikp_dataset_normalize(const cikp_dataset* ds, const char* method,
                                   cikp_dataset** out) {
  return guard([&] {
    require(ds, "dataset");
    require(method, "method");
    require(out, "out");
    *out = nullptr;
    *out = new cikp_dataset{cikp::normalize(ds->ds, cikp::normalization_from_string(method))};
  });
}

cikp_status cikp_dataset_save(const cikp_dataset* ds, const char* path) {
  return guard([&] {
    require(ds, "dataset");
    require(path, "path");
    cikp::save_dataset(ds->ds, path);
  });
}

cikp_status cikp_dataset_labels(const cikp_dataset* ds, int* labels, size_t nodes) {
  return guard([&] {
    require(ds, "dataset");
    require(labels, "labels");
    if (nodes != ds->ds.num_nodes()) throw UsageError("label buffer size mismatch");
    std::copy(ds->ds.labels.begin(), ds->ds.labels.end(), labels);
  });
}

cikp_status cikp_matrix_create(size_t rows, size_t cols, const double* data, const char* kind,
                               cikp_matrix** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    if (rows * cols > 0) require(data, "data");
    cikp::MatrixFile m;
    m.kind = kind_from(kind);
    m.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        m.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * cols + c];
      }
    }
    *out = new cikp_matrix{std::move(m)};
  });
}

cikp_status cikp_matrix_load(const char* path, cikp_matrix** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new cikp_matrix{cikp::load_matrix(path)};
  });
}

cikp_status cikp_matrix_save(const cikp_matrix* m, const char* path, const char* encoding) {
  return guard([&] {
    require(m, "matrix");
    require(path, "path");
    require(encoding, "encoding");
    const std::string enc(encoding);
    cikp::MatrixEncoding e;
    if (enc == "json") {
      e = cikp::MatrixEncoding::kJson;
    } else if (enc == "bin") {
      e = cikp::MatrixEncoding::kBinary;
    } else if (enc == "csv") {
      e = cikp::MatrixEncoding::kCsv;
    } else {
      throw UsageError("matrix encoding must be 'json', 'bin' or 'csv'");
    }
    cikp::save_matrix(m->m, path, e);
  });
}

void cikp_matrix_free(cikp_matrix* m) { delete m; }

cikp_status cikp_matrix_shape(const cikp_matrix* m, size_t* rows, size_t* cols) {
  return guard([&] {
    require(m, "matrix");
    if (rows) *rows = static_cast<size_t>(m->m.data.rows());
    if (cols) *cols = static_cast<size_t>(m->m.data.cols());
  });
}

cikp_status cikp_matrix_copy(const cikp_matrix* m, double* out, size_t capacity) {
  return guard([&] {
    require(m, "matrix");
    const auto& d = m->m.data;
    const auto n = static_cast<size_t>(d.size());
    if (n > 0) require(out, "out");
    if (capacity < n) throw UsageError("output buffer too small");
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.cols(); ++c) {
        out[static_cast<size_t>(r * d.cols() + c)] = d(r, c);
      }
    }
  });
}

cikp_status cikp_matrix_kind(const cikp_matrix* m, char* out, size_t capacity) {
  return guard([&] {
    require(m, "matrix");
    require(out, "out");
    const std::string_view name = cikp::to_string(m->m.kind);
    if (capacity < name.size() + 1) throw UsageError("output buffer too small");
    std::memcpy(out, name.data(), name.size());
    out[name.size()] = '\0';
  });
}

cikp_status cikp_recover(const cikp_dataset* ds, const char* options_json, cikp_matrix** out) {
  return guard([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = nullptr;
    Options opt(options_json, "recover options", {"correlation", "lambda", "tau"});
    cikp::RecoveryConfig cfg;
    cfg.correlation = cikp::correlation_mode_from_string(
        opt.get<std::string>("correlation", "pearson"));
    cfg.shrinkage = opt.get("lambda", cfg.shrinkage);
    cfg.sparsity_threshold = opt.get("tau", cfg.sparsity_threshold);
    cikp::MatrixFile m;
    m.data = cikp::recover(ds->ds.X, cfg).P;
    m.kind = cikp::MatrixKind::kPartialCorrelation;
    m.node_ids = ds->ds.node_ids;
    *out = new cikp_matrix{std::move(m)};
  });
}

cikp_status cikp_transition(const cikp_matrix* p, const char* kind, double alpha,
                            cikp_matrix** out) {
  return guard([&] {
    require(p, "matrix");
    require(kind, "kind");
    require(out, "out");
    *out = nullptr;
    cikp::validate_partial_correlation(p->m.data);
    const std::string k(kind);
    cikp::TransitionConfig cfg{alpha};
    cikp::TransitionMatrix t;
    if (k == "exp") {
      t = cikp::build_exp(p->m.data, cfg);
    } else if (k == "maxnorm") {
      t = cikp::build_maxnorm(p->m.data, cfg);
    } else if (k == "pos" || k == "neg") {
      auto [pos, neg] = cikp::split_pos_neg(p->m.data);
      t = k == "pos" ? std::move(pos) : std::move(neg);
    } else {
      throw UsageError("transition kind must be 'exp', 'pos', 'neg' or 'maxnorm'");
    }
    cikp::MatrixFile m;
    m.data = std::move(t.T);
    m.kind = cikp::to_matrix_kind(t.kind);
    m.node_ids = p->m.node_ids;
    *out = new cikp_matrix{std::move(m)};
  });
}

cikp_status cikp_propagate(const cikp_matrix* p, const char* problem_json,
                           const char* options_json, char** result_json) {
  return guard([&] {
    require(p, "matrix");
    require(result_json, "result_json");
    *result_json = nullptr;
    Options opt(options_json, "propagate options",
                {"method", "alpha", "epsilon", "max_iters", "regularizer", "selection",
                 "threshold"});
    const cikp::Method method =
        cikp::method_from_string(opt.get<std::string>("method", "analytical-exp"));
    if (method == cikp::Method::kNode2Vec) {
      throw UsageError("node2vec is served by the embed entry point");
    }
    cikp::KnowPropConfig cfg;
    cfg.transition.alpha = opt.get("alpha", cfg.transition.alpha);
    cfg.propagation.epsilon = opt.get("epsilon", cfg.propagation.epsilon);
    cfg.propagation.max_iters = opt.get("max_iters", cfg.propagation.max_iters);
    cfg.propagation.regularizer =
        cikp::regularizer_from_string(opt.get<std::string>("regularizer", "none"));
    const cikp::SelectionStrategy selection = selection_from(opt);

    const Problem problem = parse_problem(problem_json, p->m);
    json result;
    result["method"] = std::string(cikp::to_string(method));
    const bool exp_method =
        method == cikp::Method::kIterativeExp || method == cikp::Method::kAnalyticalExp;
    if (exp_method) cfg.propagation.regularizer = cikp::Regularizer::kNone;

    cikp::LabelState state;
    if (p->m.kind == cikp::MatrixKind::kExp) {
      if (!exp_method) throw UsageError("an exp transition matrix only serves the exp methods");
      const auto pe = cikp::make_transition(p->m.data, cikp::TransitionKind::kExp);
      if (method == cikp::Method::kAnalyticalExp) {
        auto r = cikp::analytical(pe, problem.state);
        state = std::move(r.state);
        result["iterations"] = 0;
        result["converged"] = true;
        result["mu"] = r.diagnostics.mu;
        result["solve_residual"] = r.diagnostics.solve_residual;
      } else {
        cfg.propagation.validate();
        auto r = cikp::iterate_exp(pe, problem.state, cfg.propagation);
        state = std::move(r.state);
        result["iterations"] = r.iterations;
        result["converged"] = r.converged;
      }
    } else {
      if (p->m.kind != cikp::MatrixKind::kPartialCorrelation &&
          p->m.kind != cikp::MatrixKind::kGeneric) {
        throw UsageError("propagation needs a partial-correlation or exp matrix, got '" +
                         std::string(cikp::to_string(p->m.kind)) + "'");
      }
      cikp::validate_partial_correlation(p->m.data);
      switch (method) {
        case cikp::Method::kIterativeExp:
          cfg.method = cikp::PropagationMethod::kIterativeExp;
          break;
        case cikp::Method::kIterativePos:
          cfg.method = cikp::PropagationMethod::kIterativePos;
          break;
        case cikp::Method::kIterativePosNeg:
          cfg.method = cikp::PropagationMethod::kIterativePosNeg;
          break;
        default:
          cfg.method = cikp::PropagationMethod::kAnalyticalExp;
          break;
      }
      auto r = cikp::knowprop(p->m.data, problem.state, cfg);
      state = std::move(r.state);
      result["iterations"] = r.iterations;
      result["converged"] = r.converged;
      if (exp_method) {
        result["mu"] = r.mu;
        if (method == cikp::Method::kAnalyticalExp) result["solve_residual"] = r.solve_residual;
      } else {
        result["zero_rows_pos"] = r.zero_rows_pos;
        result["zero_rows_neg"] = r.zero_rows_neg;
        result["stalled_nodes"] = r.stalled_nodes;
      }
    }
    result["categories"] = problem.categories;
    result["predictions"] = predictions_json(problem, state, selection);
    *result_json = dup_string(result.dump(2));
  });
}

cikp_status cikp_embed(const cikp_matrix* p, const char* problem_json,
                       const char* options_json, char** result_json,
                       cikp_matrix** embeddings) {
  return guard([&] {
    require(p, "matrix");
    require(result_json, "result_json");
    *result_json = nullptr;
    if (embeddings) *embeddings = nullptr;
    Options opt(options_json, "embed options",
                {"alpha", "dim", "walk_length", "walks_per_node", "p", "q", "window",
                 "negative_samples", "epochs", "learning_rate", "classifier", "loss",
                 "seed"});
    cikp::KnowPropEmbeddingConfig cfg;
    cfg.transition.alpha = opt.get("alpha", cfg.transition.alpha);
    auto& e = cfg.embedding;
    e.dimension = opt.get("dim", e.dimension);
    e.walk_length = opt.get("walk_length", e.walk_length);
    e.walks_per_node = opt.get("walks_per_node", e.walks_per_node);
    e.return_param = opt.get("p", e.return_param);
    e.inout_param = opt.get("q", e.inout_param);
    e.window = opt.get("window", e.window);
    e.negative_samples = opt.get("negative_samples", e.negative_samples);
    e.epochs = opt.get("epochs", e.epochs);
    e.learning_rate = opt.get("learning_rate", e.learning_rate);
    const auto seed = opt.get<std::uint64_t>("seed", 1);
    e.seed = cikp::derive_seed(seed, 0x454d4244u, 0);
    cfg.classifier.model =
        cikp::classifier_model_from_string(opt.get<std::string>("classifier", "logistic"));
    const auto loss = opt.get<std::string>("loss", "cross-entropy");
    if (loss == "squared") {
      cfg.classifier.loss = cikp::ClassifierLoss::kSquared;
    } else if (loss != "cross-entropy") {
      throw UsageError("loss must be 'cross-entropy' or 'squared'");
    }
    cfg.classifier.seed = cikp::derive_seed(seed, 0x434c4153u, 0);

    if (p->m.kind != cikp::MatrixKind::kPartialCorrelation &&
        p->m.kind != cikp::MatrixKind::kGeneric) {
      throw UsageError("embedding needs a partial-correlation matrix");
    }
    cikp::validate_partial_correlation(p->m.data);
    const Problem problem = parse_problem(problem_json, p->m);
    auto r = cikp::knowprop_embedding(p->m.data, problem.state, cfg);

    json result;
    result["method"] = "node2vec";
    result["epochs_run"] = r.report.epochs_run;
    result["converged"] = r.report.converged;
    result["final_loss"] = r.report.final_loss;
    result["warnings"] = r.report.warnings;
    result["categories"] = problem.categories;
    result["predictions"] = predictions_json(problem, r.state, {});
    *result_json = dup_string(result.dump(2));
    if (embeddings) {
      cikp::MatrixFile m;
      m.data = std::move(r.embeddings.vectors);
      m.kind = cikp::MatrixKind::kEmbedding;
      m.node_ids = problem.node_ids;
      *embeddings = new cikp_matrix{std::move(m)};
    }
  });
}

cikp_status cikp_experiment(const char* spec_json, const char* options_json,
                            char** report_json, char** report_csv) {
  return guard([&] {
    if (report_json) *report_json = nullptr;
    if (report_csv) *report_csv = nullptr;
    const json options = parse_options(options_json, "experiment options");
    check_option_keys(options, {"omit_timing", "omit_predictions"}, "experiment options");
    const auto spec = spec_with_overrides(spec_json, options);
    const bool omit_timing = options.value("omit_timing", false);
    const bool omit_predictions = options.value("omit_predictions", false);
    const auto report = cikp::compare_methods(cikp::load_dataset_ref(spec.dataset), spec);
    if (report_json) *report_json = dup_string(report.to_json(!omit_timing, !omit_predictions));
    if (report_csv) *report_csv = dup_string(report.to_csv());
  });
}

cikp_status cikp_sweep_mask(const char* spec_json, const char* options_json,
                            char** result_json, char** result_csv) {
  return guard([&] {
    if (result_json) *result_json = nullptr;
    if (result_csv) *result_csv = nullptr;
    const json options = parse_options(options_json, "sweep options");
    check_option_keys(options, {"method", "counts"}, "sweep options");
    const auto spec = spec_with_overrides(spec_json, options);
    const cikp::Method method = single_method(options, spec);
    if (!options.contains("counts")) throw UsageError("mask sweep needs 'counts'");
    const auto counts = options.at("counts").get<std::vector<std::size_t>>();
    const auto pts =
        cikp::masking_sweep(cikp::load_dataset_ref(spec.dataset), spec, method, counts);
    if (result_json) *result_json = dup_string(cikp::mask_sweep_to_json(method, pts));
    if (result_csv) *result_csv = dup_string(cikp::mask_sweep_to_csv(method, pts));
  });
}

cikp_status cikp_sweep_threshold(const char* spec_json, const char* options_json,
                                 char** result_json, char** result_csv) {
  return guard([&] {
    if (result_json) *result_json = nullptr;
    if (result_csv) *result_csv = nullptr;
    const json options = parse_options(options_json, "sweep options");
    check_option_keys(options, {"method", "thresholds", "relative", "level"},
                      "sweep options");
    const auto spec = spec_with_overrides(spec_json, options);
    const cikp::Method method = single_method(options, spec);
    if (!options.contains("thresholds")) throw UsageError("threshold sweep needs 'thresholds'");
    const auto thresholds = options.at("thresholds").get<std::vector<double>>();
    cikp::MaskingLevel level = spec.masking.front();
    if (options.contains("level")) {
      const json& l = options.at("level");
      if (l.is_number_integer() && l.get<long long>() >= 1) {
        level = cikp::MaskingLevel::of_count(l.get<std::size_t>());
      } else if (l.is_number()) {
        level = cikp::MaskingLevel::of_fraction(l.get<double>());
      } else {
        throw UsageError("level must be a fraction or a positive count");
      }
    }
    const auto scale = options.value("relative", false) ? cikp::ThresholdScale::kRelative
                                                         : cikp::ThresholdScale::kAbsolute;
    const auto pts = cikp::threshold_sweep(cikp::load_dataset_ref(spec.dataset), spec,
                                           method, level, thresholds, scale);
    if (result_json) *result_json = dup_string(cikp::threshold_sweep_to_json(method, pts));
    if (result_csv) *result_csv = dup_string(cikp::threshold_sweep_to_csv(method, pts));
  });
}

}  // extern "C"
