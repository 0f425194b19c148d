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

// Command-line front end over the C API. Exit codes follow cikp_status.

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cikp/cikp.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

struct StringDeleter {
  void operator()(char* s) const { cikp_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct DatasetDeleter {
  void operator()(cikp_dataset* d) const { cikp_dataset_free(d); }
};
using OwnedDataset = std::unique_ptr<cikp_dataset, DatasetDeleter>;

struct MatrixDeleter {
  void operator()(cikp_matrix* m) const { cikp_matrix_free(m); }
};
using OwnedMatrix = std::unique_ptr<cikp_matrix, MatrixDeleter>;

// Carries a library status up to main().
struct Failure {
  cikp_status status;
};

void check(cikp_status status) {
  if (status != CIKP_OK) {
    std::cerr << "error: " << cikp_last_error() << '\n';
    throw Failure{status};
  }
}

void usage_error(const std::string& message) {
  std::cerr << "error: " << message << '\n';
  throw Failure{CIKP_ERROR_USAGE};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    throw Failure{CIKP_ERROR_DATA};
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const CommonOptions& common, const std::string& text) {
  if (common.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(common.out, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << common.out << "'\n";
    throw Failure{CIKP_ERROR_DATA};
  }
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void add_common(CLI::App* cmd, CommonOptions& common, bool allow_bin = false) {
  cmd->add_option("--seed", common.seed, "Master RNG seed");
  cmd->add_option("--out", common.out, "Output path (default: stdout)");
  std::vector<std::string> formats{"json", "csv"};
  if (allow_bin) formats.emplace_back("bin");
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
}

// Flattens a propagate/embed result into node_id,category,confidence rows.
std::string predictions_csv(const std::string& result_json) {
  const json r = json::parse(result_json);
  std::ostringstream os;
  os << "node_id,category,confidence\n";
  os.precision(17);
  for (const auto& p : r.at("predictions")) {
    os << p.at("node_id").get<std::string>() << ','
       << (p.at("category").is_null() ? std::string() : p.at("category").get<std::string>())
       << ',' << p.at("confidence").get<double>() << '\n';
  }
  return os.str();
}

struct RecoverArgs {
  std::string data;
  std::string input_format = "cora";
  std::size_t subset = 0;
  std::string normalize = "none";
  std::string correlation = "pearson";
  double lambda = 0.1;
  double tau = 0.0;
  bool stratified = false;
  std::string transition;
  double alpha = 2.0;
};

void run_recover(const CommonOptions& common, const RecoverArgs& a) {
  cikp_dataset* raw = nullptr;
  check(cikp_dataset_load(a.data.c_str(), a.input_format.c_str(), &raw));
  OwnedDataset ds(raw);
  if (a.subset > 0) {
    check(cikp_dataset_subsample(ds.get(), a.subset, common.seed.value_or(1),
                                 a.stratified ? 1 : 0, &raw));
    ds.reset(raw);
  }
  check(cikp_dataset_normalize(ds.get(), a.normalize.c_str(), &raw));
  ds.reset(raw);
  const json options = {{"correlation", a.correlation}, {"lambda", a.lambda}, {"tau", a.tau}};
  cikp_matrix* m = nullptr;
  check(cikp_recover(ds.get(), options.dump().c_str(), &m));
  OwnedMatrix matrix(m);
  if (!a.transition.empty()) {
    check(cikp_transition(matrix.get(), a.transition.c_str(), a.alpha, &m));
    matrix.reset(m);
  }
  if (common.out.empty()) {
    if (common.format == "bin") usage_error("--format bin needs --out");
    // Round-trip through a temporary file keeps serialization in the library.
    const std::string tmp = std::filesystem::temp_directory_path() /
                            ("cikp_recover_" + std::to_string(::getpid()) + "." + common.format);
    check(cikp_matrix_save(matrix.get(), tmp.c_str(), common.format.c_str()));
    std::cout << read_text(tmp);
    std::filesystem::remove(tmp);
    return;
  }
  check(cikp_matrix_save(matrix.get(), common.out.c_str(), common.format.c_str()));
}

struct PropagateArgs {
  std::string matrix;
  std::string problem;
  std::string method = "analytical-exp";
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<int> max_iters;
  std::string regularizer = "none";
  std::optional<double> threshold;
};

void run_propagate(const CommonOptions& common, const PropagateArgs& a) {
  cikp_matrix* m = nullptr;
  check(cikp_matrix_load(a.matrix.c_str(), &m));
  OwnedMatrix matrix(m);
  const std::string problem = read_text(a.problem);
  json options = {{"method", a.method}, {"regularizer", a.regularizer}};
  if (a.alpha) options["alpha"] = *a.alpha;
  if (a.epsilon) options["epsilon"] = *a.epsilon;
  if (a.max_iters) options["max_iters"] = *a.max_iters;
  if (a.threshold) {
    options["selection"] = "threshold";
    options["threshold"] = *a.threshold;
  }
  char* result = nullptr;
  check(cikp_propagate(matrix.get(), problem.c_str(), options.dump().c_str(), &result));
  OwnedString owned(result);
  emit(common, common.format == "csv" ? predictions_csv(result) : std::string(result));
}

struct EmbedArgs {
  std::string matrix;
  std::string problem;
  double alpha = 2.0;
  std::size_t dim = 64;
  std::size_t walk_length = 20;
  std::size_t walks_per_node = 10;
  double p = 1.0;
  double q = 2.0;
  std::size_t window = 5;
  std::size_t epochs = 5;
  std::string classifier = "logistic";
  std::string embeddings_out;
};

void run_embed(const CommonOptions& common, const EmbedArgs& a) {
  cikp_matrix* m = nullptr;
  check(cikp_matrix_load(a.matrix.c_str(), &m));
  OwnedMatrix matrix(m);
  const std::string problem = read_text(a.problem);
  const json options = {{"alpha", a.alpha},
                        {"dim", a.dim},
                        {"walk_length", a.walk_length},
                        {"walks_per_node", a.walks_per_node},
                        {"p", a.p},
                        {"q", a.q},
                        {"window", a.window},
                        {"epochs", a.epochs},
                        {"classifier", a.classifier},
                        {"seed", common.seed.value_or(1)}};
  char* result = nullptr;
  cikp_matrix* emb = nullptr;
  check(cikp_embed(matrix.get(), problem.c_str(), options.dump().c_str(), &result,
                   a.embeddings_out.empty() ? nullptr : &emb));
  OwnedString owned(result);
  OwnedMatrix embeddings(emb);
  if (embeddings) {
    const bool binary = a.embeddings_out.size() > 4 &&
                        a.embeddings_out.compare(a.embeddings_out.size() - 4, 4, ".bin") == 0;
    check(cikp_matrix_save(embeddings.get(), a.embeddings_out.c_str(), binary ? "bin" : "json"));
  }
  emit(common, common.format == "csv" ? predictions_csv(result) : std::string(result));
}

struct SpecOverrides {
  std::string spec;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> validation_runs;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> subset_size;
  std::string resample;
  std::string split;
  bool no_tune = false;
};

void add_spec_options(CLI::App* cmd, SpecOverrides& o) {
  cmd->add_option("--spec", o.spec, "Experiment spec (JSON)")->required();
  cmd->add_option("--runs", o.runs, "Runs per cell");
  cmd->add_option("--validation-runs", o.validation_runs, "Validation runs per grid point");
  cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  cmd->add_option("--subset-size", o.subset_size, "Nodes per subsample (0: all)");
  cmd->add_option("--resample", o.resample, "Subsample policy")
      ->check(CLI::IsMember({"per-run", "once"}));
  cmd->add_option("--split", o.split, "Evaluation seeds")
      ->check(CLI::IsMember({"test", "validation"}));
  cmd->add_flag("--no-tune", o.no_tune, "Use the spec's fixed hyperparameters");
}

json overrides_json(const CommonOptions& common, const SpecOverrides& o) {
  json j = json::object();
  if (common.seed) j["seed"] = *common.seed;
  if (o.runs) j["runs"] = *o.runs;
  if (o.validation_runs) j["validation_runs"] = *o.validation_runs;
  if (o.threads) j["threads"] = *o.threads;
  if (o.subset_size) j["subset_size"] = *o.subset_size;
  if (!o.resample.empty()) j["resample"] = o.resample;
  if (!o.split.empty()) j["split"] = o.split;
  if (o.no_tune) j["tune"] = false;
  return j;
}

void emit_pair(const CommonOptions& common, char* json_text, char* csv_text) {
  OwnedString a(json_text);
  OwnedString b(csv_text);
  emit(common, common.format == "csv" ? std::string(b.get()) : std::string(a.get()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge propagation over conditional independence graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cikp_version()));

  CommonOptions recover_common, propagate_common, embed_common, experiment_common,
      mask_common, threshold_common;

  RecoverArgs recover_args;
  auto* recover = app.add_subcommand("recover", "Dataset -> partial-correlation matrix");
  recover->add_option("--data", recover_args.data, "Dataset file")->required();
  recover->add_option("--input-format", recover_args.input_format, "Dataset format")
      ->check(CLI::IsMember({"cora", "pubmed", "json"}))
      ->capture_default_str();
  recover->add_option("--subset", recover_args.subset, "Subsample size (0: all nodes)");
  recover->add_flag("--stratified", recover_args.stratified, "Stratified subsampling");
  recover->add_option("--normalize", recover_args.normalize, "Column normalization")
      ->check(CLI::IsMember({"none", "minmax", "mean"}))
      ->capture_default_str();
  recover->add_option("--correlation", recover_args.correlation, "Correlation estimator")
      ->check(CLI::IsMember({"pearson", "spearman"}))
      ->capture_default_str();
  recover->add_option("--lambda", recover_args.lambda, "Shrinkage toward identity")
      ->capture_default_str();
  recover->add_option("--tau", recover_args.tau, "Zero partial correlations below |tau|")
      ->capture_default_str();
  recover->add_option("--transition", recover_args.transition,
                      "Emit a transition matrix instead")
      ->check(CLI::IsMember({"exp", "pos", "neg", "maxnorm"}));
  recover->add_option("--alpha", recover_args.alpha, "Transition scaling")
      ->capture_default_str();
  add_common(recover, recover_common, true);

  PropagateArgs prop_args;
  auto* propagate = app.add_subcommand("propagate", "Propagate known labels");
  propagate->add_option("--matrix", prop_args.matrix, "Matrix file")->required();
  propagate->add_option("--problem", prop_args.problem, "Problem file (JSON)")->required();
  propagate->add_option("--method", prop_args.method, "Propagation method")
      ->check(CLI::IsMember(
          {"iterative-exp", "iterative-pos", "iterative-posneg", "analytical-exp"}))
      ->capture_default_str();
  propagate->add_option("--alpha", prop_args.alpha, "Transition scaling");
  propagate->add_option("--epsilon", prop_args.epsilon, "Convergence tolerance");
  propagate->add_option("--max-iters", prop_args.max_iters, "Iteration cap");
  propagate->add_option("--regularizer", prop_args.regularizer, "Split-update regularizer")
      ->check(CLI::IsMember({"kl", "wasserstein", "none"}))
      ->capture_default_str();
  propagate->add_option("--threshold", prop_args.threshold,
                        "Abstain below this confidence");
  add_common(propagate, propagate_common);

  EmbedArgs embed_args;
  auto* embed = app.add_subcommand("embed", "node2vec embeddings + classifier");
  embed->add_option("--matrix", embed_args.matrix, "Partial-correlation matrix")->required();
  embed->add_option("--problem", embed_args.problem, "Problem file (JSON)")->required();
  embed->add_option("--alpha", embed_args.alpha, "Walk weight scaling")->capture_default_str();
  embed->add_option("--dim", embed_args.dim, "Embedding size")->capture_default_str();
  embed->add_option("--walk-length", embed_args.walk_length)->capture_default_str();
  embed->add_option("--walks-per-node", embed_args.walks_per_node)->capture_default_str();
  embed->add_option("--p", embed_args.p, "Return parameter")->capture_default_str();
  embed->add_option("--q", embed_args.q, "In-out parameter")->capture_default_str();
  embed->add_option("--window", embed_args.window)->capture_default_str();
  embed->add_option("--epochs", embed_args.epochs)->capture_default_str();
  embed->add_option("--classifier", embed_args.classifier)
      ->check(CLI::IsMember({"logistic", "mlp"}))
      ->capture_default_str();
  embed->add_option("--embeddings-out", embed_args.embeddings_out,
                    "Also write the embedding matrix (.bin or JSON)");
  add_common(embed, embed_common);

  SpecOverrides exp_spec;
  bool no_timing = false;
  bool no_predictions = false;
  auto* experiment = app.add_subcommand("experiment", "Method x masking-level comparison");
  add_spec_options(experiment, exp_spec);
  experiment->add_flag("--no-timing", no_timing, "Omit runtime fields");
  experiment->add_flag("--no-predictions", no_predictions, "Omit per-node predictions");
  add_common(experiment, experiment_common);

  SpecOverrides mask_spec;
  std::string mask_method;
  std::vector<std::size_t> counts;
  auto* sweep_mask = app.add_subcommand("sweep-mask", "Accuracy versus masked-node count");
  add_spec_options(sweep_mask, mask_spec);
  sweep_mask->add_option("--method", mask_method, "Method (default: the spec's only one)");
  sweep_mask->add_option("--counts", counts, "Masked counts")->required()->delimiter(',');
  add_common(sweep_mask, mask_common);

  SpecOverrides thr_spec;
  std::string thr_method;
  std::vector<double> thresholds;
  bool relative = false;
  std::optional<double> level;
  auto* sweep_threshold =
      app.add_subcommand("sweep-threshold", "Coverage and accuracy versus confidence threshold");
  add_spec_options(sweep_threshold, thr_spec);
  sweep_threshold->add_option("--method", thr_method, "Method (default: the spec's only one)");
  sweep_threshold->add_option("--thresholds", thresholds, "Thresholds")
      ->required()
      ->delimiter(',');
  sweep_threshold->add_flag("--relative", relative,
                            "Thresholds t in [0,1] map to 1/C + t*(max - 1/C) per run");
  sweep_threshold->add_option("--level", level,
                              "Masking level: fraction in (0,1) or count >= 1");
  add_common(sweep_threshold, threshold_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return CIKP_ERROR_USAGE;
  }

  try {
    if (*recover) {
      run_recover(recover_common, recover_args);
    } else if (*propagate) {
      run_propagate(propagate_common, prop_args);
    } else if (*embed) {
      run_embed(embed_common, embed_args);
    } else if (*experiment) {
      const std::string spec = read_text(exp_spec.spec);
      json options = overrides_json(experiment_common, exp_spec);
      if (no_timing) options["omit_timing"] = true;
      if (no_predictions) options["omit_predictions"] = true;
      char* out_json = nullptr;
      char* out_csv = nullptr;
      check(cikp_experiment(spec.c_str(), options.dump().c_str(), &out_json, &out_csv));
      emit_pair(experiment_common, out_json, out_csv);
    } else if (*sweep_mask) {
      const std::string spec = read_text(mask_spec.spec);
      json options = overrides_json(mask_common, mask_spec);
      if (!mask_method.empty()) options["method"] = mask_method;
      options["counts"] = counts;
      char* out_json = nullptr;
      char* out_csv = nullptr;
      check(cikp_sweep_mask(spec.c_str(), options.dump().c_str(), &out_json, &out_csv));
      emit_pair(mask_common, out_json, out_csv);
    } else if (*sweep_threshold) {
      const std::string spec = read_text(thr_spec.spec);
      json options = overrides_json(threshold_common, thr_spec);
      if (!thr_method.empty()) options["method"] = thr_method;
      options["thresholds"] = thresholds;
      options["relative"] = relative;
      if (level) {
        if (*level >= 1.0) {
          options["level"] = static_cast<std::size_t>(*level);
        } else {
          options["level"] = *level;
        }
      }
      char* out_json = nullptr;
      char* out_csv = nullptr;
      check(cikp_sweep_threshold(spec.c_str(), options.dump().c_str(), &out_json, &out_csv));
      emit_pair(threshold_common, out_json, out_csv);
    }
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return CIKP_ERROR_DATA;
  }
  return 0;
}
