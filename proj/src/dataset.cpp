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

#include "cikp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "cikp/error.hpp"
#include "cikp/matrix_io.hpp"
#include "json.hpp"

namespace cikp {
namespace {

using json = nlohmann::json;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t'; });
}

double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": invalid number '" +
                    std::string(token) + "'");
  }
  return value;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

// Assigns label indices from sorted distinct names.
void index_labels(const std::vector<std::string>& raw, Dataset& ds) {
  std::set<std::string> names(raw.begin(), raw.end());
  ds.category_names.assign(names.begin(), names.end());
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < ds.category_names.size(); ++c) {
    index[ds.category_names[c]] = static_cast<int>(c);
  }
  ds.labels.clear();
  ds.labels.reserve(raw.size());
  for (const auto& name : raw) ds.labels.push_back(index.at(name));
}

}  // namespace

std::string_view to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::kCora: return "Cora";
    case SourceTag::kPubMedDiabetes: return "PubMedDiabetes";
    case SourceTag::kSynthetic: return "Synthetic";
    case SourceTag::kCustom: return "Custom";
  }
  return "Custom";
}

SourceTag source_tag_from_string(std::string_view name) {
  if (name == "Cora") return SourceTag::kCora;
  if (name == "PubMedDiabetes") return SourceTag::kPubMedDiabetes;
  if (name == "Synthetic") return SourceTag::kSynthetic;
  if (name == "Custom") return SourceTag::kCustom;
  throw DataError("unknown dataset source tag '" + std::string(name) + "'");
}

void Dataset::validate() const {
  const std::size_t d = node_ids.size();
  if (d == 0) throw DataError("dataset has no nodes");
  if (labels.size() != d) throw DataError("label count does not match node count");
  if (static_cast<std::size_t>(X.cols()) != d) {
    throw DataError("feature matrix has " + std::to_string(X.cols()) +
                    " columns for " + std::to_string(d) + " nodes");
  }
  if (category_names.size() < 2) throw DataError("need at least 2 categories");
  std::set<std::string> distinct(category_names.begin(), category_names.end());
  if (distinct.size() != category_names.size()) {
    throw DataError("duplicate category name");
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= category_names.size()) {
      throw DataError("label index out of range");
    }
  }
  if (!X.allFinite()) throw DataError("feature matrix contains non-finite values");
  std::unordered_set<std::string> ids;
  for (const auto& id : node_ids) {
    if (!ids.insert(id).second) throw DataError("duplicate node id '" + id + "'");
  }
}

bool Dataset::operator==(const Dataset& other) const {
  return node_ids == other.node_ids && labels == other.labels &&
         category_names == other.category_names && source == other.source &&
         X.rows() == other.X.rows() && X.cols() == other.X.cols() && X == other.X;
}

std::vector<bool> KnownMask::is_known() const {
  std::vector<bool> flags(size(), false);
  for (std::size_t k : known) flags[k] = true;
  return flags;
}

KnownMask KnownMask::from_unknown(std::size_t num_nodes,
                                  std::vector<std::size_t> unknown) {
  std::sort(unknown.begin(), unknown.end());
  if (std::adjacent_find(unknown.begin(), unknown.end()) != unknown.end()) {
    throw UsageError("duplicate node in unknown set");
  }
  if (!unknown.empty() && unknown.back() >= num_nodes) {
    throw UsageError("unknown node index out of range");
  }
  KnownMask mask;
  mask.unknown = std::move(unknown);
  std::size_t u = 0;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (u < mask.unknown.size() && mask.unknown[u] == i) {
      ++u;
    } else {
      mask.known.push_back(i);
    }
  }
  return mask;
}

Dataset parse_cora(std::string_view text) {
  Dataset ds;
  ds.source = SourceTag::kCora;
  std::vector<std::string> raw_labels;
  std::vector<std::vector<double>> columns;
  std::unordered_set<std::string> seen;
  std::size_t width = 0;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    const auto fields = split_whitespace(lines[i]);
    if (fields.size() < 3) {
      throw DataError(line_error(line_no, "expected <id> <features...> <label>"));
    }
    if (width == 0) width = fields.size() - 2;
    if (fields.size() - 2 != width) {
      throw DataError(line_error(line_no, "expected " + std::to_string(width + 2) +
                                              " fields, found " +
                                              std::to_string(fields.size())));
    }
    std::string id(fields.front());
    if (!seen.insert(id).second) {
      throw DataError(line_error(line_no, "duplicate paper id '" + id + "'"));
    }
    std::vector<double> col(width);
    for (std::size_t w = 0; w < width; ++w) {
      const auto tok = fields[w + 1];
      if (tok == "0") {
        col[w] = 0.0;
      } else if (tok == "1") {
        col[w] = 1.0;
      } else {
        throw DataError(line_error(line_no, "non-binary feature '" + std::string(tok) +
                                                "' at column " + std::to_string(w + 1)));
      }
    }
    ds.node_ids.push_back(std::move(id));
    raw_labels.emplace_back(fields.back());
    columns.push_back(std::move(col));
  }
  if (columns.empty()) throw DataError("Cora content file has no nodes");

  ds.X.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t w = 0; w < width; ++w) {
      ds.X(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) = columns[c][w];
    }
  }
  index_labels(raw_labels, ds);
  ds.validate();
  return ds;
}

Dataset load_cora(const std::filesystem::path& content_path) {
  return parse_cora(read_file(content_path));
}

Dataset parse_pubmed(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  auto next_nonblank = [&]() {
    while (i < lines.size() && is_blank(lines[i])) ++i;
  };

  next_nonblank();
  if (i >= lines.size() || lines[i].substr(0, 4) != "NODE") {
    throw DataError("line 1: expected 'NODE' header");
  }
  ++i;
  next_nonblank();
  if (i >= lines.size()) throw DataError("missing attribute declaration line");

  // Attribute declarations: cat=<labels>:label, numeric:<word>:<default>,
  // string:summary.
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, std::size_t> word_index;
  std::vector<std::string> categories;
  const std::size_t decl_line = i + 1;
  for (auto field : split_char(lines[i], '\t')) {
    if (field.empty()) continue;
    if (field.substr(0, 4) == "cat=") {
      const auto colon = field.rfind(':');
      if (colon == std::string_view::npos || field.substr(colon + 1) != "label") {
        throw DataError(line_error(decl_line, "malformed category declaration '" +
                                                  std::string(field) + "'"));
      }
      for (auto c : split_char(field.substr(4, colon - 4), ',')) {
        categories.emplace_back(c);
      }
    } else if (field.substr(0, 8) == "numeric:") {
      const auto rest = field.substr(8);
      const auto colon = rest.find(':');
      std::string word(rest.substr(0, colon));
      if (word.empty() || !word_index.emplace(word, vocabulary.size()).second) {
        throw DataError(line_error(decl_line, "bad or duplicate word declaration '" +
                                                  std::string(field) + "'"));
      }
      vocabulary.push_back(std::move(word));
    } else if (field.substr(0, 7) == "string:") {
      continue;
    } else {
      throw DataError(line_error(decl_line, "unrecognized declaration '" +
                                                std::string(field) + "'"));
    }
  }
  if (categories.empty()) categories = {"1", "2", "3"};
  std::unordered_map<std::string, int> category_index;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    category_index[categories[c]] = static_cast<int>(c);
  }
  ++i;

  Dataset ds;
  ds.source = SourceTag::kPubMedDiabetes;
  ds.category_names = categories;
  std::vector<std::vector<std::pair<std::size_t, double>>> entries;
  std::unordered_set<std::string> seen;
  for (; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (is_blank(lines[i])) continue;
    const auto fields = split_char(lines[i], '\t');
    std::string id(fields.front());
    if (id.empty()) throw DataError(line_error(line_no, "missing node id"));
    if (!seen.insert(id).second) {
      throw DataError(line_error(line_no, "duplicate node id '" + id + "'"));
    }
    int label = -1;
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto field = fields[f];
      if (field.empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) {
        throw DataError(line_error(line_no, "expected key=value, found '" +
                                                std::string(field) + "'"));
      }
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "label") {
        auto it = category_index.find(std::string(value));
        if (it == category_index.end()) {
          throw DataError(line_error(line_no, "label '" + std::string(value) +
                                                  "' not among declared categories"));
        }
        label = it->second;
      } else if (key == "summary") {
        continue;
      } else {
        auto it = word_index.find(std::string(key));
        if (it == word_index.end()) {
          throw DataError(line_error(line_no, "unknown word token '" + std::string(key) + "'"));
        }
        row.emplace_back(it->second, parse_double(value, line_no));
      }
    }
    if (label < 0) throw DataError(line_error(line_no, "missing label"));
    ds.node_ids.push_back(std::move(id));
    ds.labels.push_back(label);
    entries.push_back(std::move(row));
  }
  if (entries.empty()) throw DataError("PubMed node file has no nodes");

  ds.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocabulary.size()),
                               static_cast<Eigen::Index>(entries.size()));
  for (std::size_t c = 0; c < entries.size(); ++c) {
    for (auto [w, v] : entries[c]) {
      ds.X(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) = v;
    }
  }
  ds.validate();
  return ds;
}

Dataset load_pubmed(const std::filesystem::path& node_path) {
  return parse_pubmed(read_file(node_path));
}

namespace {

Dataset restrict_columns(const Dataset& ds, const std::vector<std::size_t>& keep) {
  Dataset out;
  out.source = ds.source;
  out.category_names = ds.category_names;
  out.X.resize(ds.X.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.node_ids.push_back(ds.node_ids[keep[j]]);
    out.labels.push_back(ds.labels[keep[j]]);
    out.X.col(static_cast<Eigen::Index>(j)) = ds.X.col(static_cast<Eigen::Index>(keep[j]));
  }
  return out;
}

}  // namespace

Dataset subsample(const Dataset& ds, std::size_t size, std::uint64_t seed,
                  bool stratified) {
  const std::size_t d = ds.num_nodes();
  if (size == 0) throw UsageError("subsample size must be positive");
  if (size > d) {
    throw UsageError("subsample size " + std::to_string(size) + " exceeds " +
                     std::to_string(d) + " nodes");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(size);
  if (!stratified) {
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::sample(all.begin(), all.end(), std::back_inserter(keep), size, rng);
  } else {
    const std::size_t c = ds.num_categories();
    std::vector<std::vector<std::size_t>> by_class(c);
    for (std::size_t i = 0; i < d; ++i) {
      by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }
    // Largest-remainder quotas; ties to the lower class index.
    std::vector<std::size_t> quota(c);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < c; ++k) {
      const double exact = static_cast<double>(size) *
                           static_cast<double>(by_class[k].size()) /
                           static_cast<double>(d);
      quota[k] = static_cast<std::size_t>(std::floor(exact));
      assigned += quota[k];
      remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < size; r = (r + 1) % c) {
      const std::size_t k = remainders[r].second;
      if (quota[k] < by_class[k].size()) {
        ++quota[k];
        ++assigned;
      }
    }
    for (std::size_t k = 0; k < c; ++k) {
      std::sample(by_class[k].begin(), by_class[k].end(), std::back_inserter(keep),
                  quota[k], rng);
    }
    std::sort(keep.begin(), keep.end());
  }
  return restrict_columns(ds, keep);
}

Normalization normalization_from_string(std::string_view name) {
  if (name == "none") return Normalization::kNone;
  if (name == "minmax") return Normalization::kMinMax;
  if (name == "mean" || name == "meancenter") return Normalization::kMeanCenter;
  throw UsageError("unknown normalization '" + std::string(name) + "'");
}

Dataset normalize(const Dataset& ds, Normalization method) {
  Dataset out = ds;
  switch (method) {
    case Normalization::kNone:
      break;
    case Normalization::kMinMax:
      for (Eigen::Index j = 0; j < out.X.cols(); ++j) {
        auto col = out.X.col(j);
        const double lo = col.minCoeff();
        const double range = col.maxCoeff() - lo;
        if (range > 0.0) {
          col = (col.array() - lo) / range;
        } else {
          col.setZero();
        }
      }
      break;
    case Normalization::kMeanCenter:
      for (Eigen::Index j = 0; j < out.X.cols(); ++j) {
        auto col = out.X.col(j);
        col.array() -= col.mean();
      }
      break;
  }
  return out;
}

KnownMask mask_labels_count(std::size_t num_nodes, std::size_t count,
                            std::uint64_t seed) {
  if (count == 0) throw UsageError("mask count must be positive");
  if (count >= num_nodes) {
    throw UsageError("mask count " + std::to_string(count) +
                     " leaves no known node among " + std::to_string(num_nodes));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> all(num_nodes);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> unknown;
  std::sample(all.begin(), all.end(), std::back_inserter(unknown), count, rng);
  return KnownMask::from_unknown(num_nodes, std::move(unknown));
}

KnownMask mask_labels_fraction(std::size_t num_nodes, double fraction,
                               std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw UsageError("mask fraction must lie in (0, 1)");
  }
  const auto count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(num_nodes)));
  if (count == 0) throw UsageError("mask fraction masks no node");
  return mask_labels_count(num_nodes, count, seed);
}

std::string dataset_to_json(const Dataset& ds) {
  json doc;
  doc["format"] = "cikp-dataset";
  doc["version"] = 1;
  doc["source"] = std::string(to_string(ds.source));
  doc["node_ids"] = ds.node_ids;
  doc["categories"] = ds.category_names;
  doc["labels"] = ds.labels;
  json features;
  features["rows"] = ds.X.rows();
  features["cols"] = ds.X.cols();
  const auto nnz = (ds.X.array() != 0.0).count();
  if (2 * nnz < ds.X.size()) {
    features["layout"] = "sparse";
    json entries = json::array();
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
      for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
        if (ds.X(r, c) != 0.0) entries.push_back({r, c, ds.X(r, c)});
      }
    }
    features["entries"] = std::move(entries);
  } else {
    features["layout"] = "dense";
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(ds.X.size()));
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
      for (Eigen::Index c = 0; c < ds.X.cols(); ++c) data.push_back(ds.X(r, c));
    }
    features["data"] = std::move(data);
  }
  doc["features"] = std::move(features);
  return doc.dump();
}

Dataset dataset_from_json(std::string_view text) {
  Dataset ds;
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "cikp-dataset") throw DataError("not a cikp-dataset document");
    ds.source = source_tag_from_string(doc.at("source").get<std::string>());
    ds.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
    ds.category_names = doc.at("categories").get<std::vector<std::string>>();
    ds.labels = doc.at("labels").get<std::vector<int>>();
    const json& f = doc.at("features");
    const auto rows = f.at("rows").get<Eigen::Index>();
    const auto cols = f.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw DataError("negative feature shape");
    ds.X = Eigen::MatrixXd::Zero(rows, cols);
    const auto layout = f.at("layout").get<std::string>();
    if (layout == "dense") {
      const auto data = f.at("data").get<std::vector<double>>();
      if (data.size() != static_cast<std::size_t>(rows * cols)) {
        throw DataError("dense feature payload has wrong length");
      }
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          ds.X(r, c) = data[static_cast<std::size_t>(r * cols + c)];
        }
      }
    } else if (layout == "sparse") {
      for (const auto& e : f.at("entries")) {
        const auto r = e.at(0).get<Eigen::Index>();
        const auto c = e.at(1).get<Eigen::Index>();
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
          throw DataError("sparse feature entry out of range");
        }
        ds.X(r, c) = e.at(2).get<double>();
      }
    } else {
      throw DataError("unknown feature layout '" + layout + "'");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid dataset JSON: ") + e.what());
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file(path, dataset_to_json(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_file(path));
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.nodes == 0 || spec.categories < 2 || spec.words < spec.categories) {
    throw UsageError("synthetic spec needs nodes >= 1, categories >= 2, words >= categories");
  }
  if (!(spec.signal >= 0.0 && spec.signal <= 1.0 && spec.noise >= 0.0 && spec.noise <= 1.0)) {
    throw UsageError("synthetic signal and noise must be probabilities");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset ds;
  ds.source = SourceTag::kSynthetic;
  for (std::size_t c = 0; c < spec.categories; ++c) {
    ds.category_names.push_back("class" + std::to_string(c));
  }
  const std::size_t block = spec.words / spec.categories;
  ds.X.resize(static_cast<Eigen::Index>(spec.words), static_cast<Eigen::Index>(spec.nodes));
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const int label = static_cast<int>(i % spec.categories);
    ds.node_ids.push_back("n" + std::to_string(i));
    ds.labels.push_back(label);
    for (std::size_t w = 0; w < spec.words; ++w) {
      const bool topical = w / block == static_cast<std::size_t>(label);
      const double p = topical ? spec.signal : spec.noise;
      ds.X(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(i)) =
          unit(rng) < p ? 1.0 : 0.0;
    }
  }
  return ds;
}

}  // namespace cikp
