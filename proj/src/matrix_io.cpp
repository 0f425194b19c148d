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

#include "cikp/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cikp/error.hpp"
#include "json.hpp"

namespace cikp {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'C', 'I', 'K', 'P', 'M', 'A', 'T', '1'};
constexpr std::size_t kHeaderBytes = 32;
constexpr std::uint32_t kFlagNodeIds = 1;

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

MatrixKind kind_from_code(std::uint32_t code) {
  if (code > static_cast<std::uint32_t>(MatrixKind::kEmbedding)) {
    throw DataError("unknown matrix kind code " + std::to_string(code));
  }
  return static_cast<MatrixKind>(code);
}

}  // namespace

std::string_view to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::kGeneric: return "generic";
    case MatrixKind::kPartialCorrelation: return "partial-correlation";
    case MatrixKind::kExp: return "exp";
    case MatrixKind::kPos: return "pos";
    case MatrixKind::kNeg: return "neg";
    case MatrixKind::kMaxNorm: return "maxnorm";
    case MatrixKind::kEmbedding: return "embedding";
  }
  return "generic";
}

MatrixKind matrix_kind_from_string(std::string_view name) {
  for (std::uint32_t code = 0; code <= static_cast<std::uint32_t>(MatrixKind::kEmbedding);
       ++code) {
    const auto kind = static_cast<MatrixKind>(code);
    if (to_string(kind) == name) return kind;
  }
  throw UsageError("unknown matrix kind '" + std::string(name) + "'");
}

std::string matrix_to_json(const MatrixFile& m) {
  json doc;
  doc["format"] = "cikp-matrix";
  doc["version"] = 1;
  doc["kind"] = std::string(to_string(m.kind));
  doc["rows"] = m.data.rows();
  doc["cols"] = m.data.cols();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.data.size()));
  for (Eigen::Index r = 0; r < m.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) values.push_back(m.data(r, c));
  }
  doc["data"] = std::move(values);
  if (!m.node_ids.empty()) doc["node_ids"] = m.node_ids;
  return doc.dump();
}

MatrixFile matrix_from_json(std::string_view text) {
  MatrixFile m;
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "cikp-matrix") throw DataError("not a cikp-matrix document");
    m.kind = matrix_kind_from_string(doc.at("kind").get<std::string>());
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw DataError("negative matrix shape");
    const auto& data = doc.at("data");
    if (data.size() != static_cast<std::size_t>(rows * cols)) {
      throw DataError("matrix payload has " + std::to_string(data.size()) +
                      " values, expected " + std::to_string(rows * cols));
    }
    m.data.resize(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m.data(r, c) = data[k++].get<double>();
    }
    if (doc.contains("node_ids")) {
      m.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
      if (m.node_ids.size() != static_cast<std::size_t>(rows)) {
        throw DataError("node_ids length does not match row count");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid matrix JSON: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  if (!m.data.allFinite()) throw DataError("matrix contains non-finite values");
  return m;
}

std::string matrix_to_binary(const MatrixFile& m) {
  std::string out;
  out.reserve(kHeaderBytes + sizeof(double) * static_cast<std::size_t>(m.data.size()));
  out.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.kind));
  put<std::uint32_t>(out, m.node_ids.empty() ? 0 : kFlagNodeIds);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.data.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.data.cols()));
  for (Eigen::Index r = 0; r < m.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) put<double>(out, m.data(r, c));
  }
  if (!m.node_ids.empty()) {
    if (m.node_ids.size() != static_cast<std::size_t>(m.data.rows())) {
      throw UsageError("node_ids length does not match row count");
    }
    for (const auto& id : m.node_ids) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
      out.append(id);
    }
  }
  return out;
}

MatrixFile matrix_from_binary(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a binary cikp matrix");
  }
  MatrixFile m;
  m.kind = kind_from_code(get<std::uint32_t>(bytes, 8));
  const auto flags = get<std::uint32_t>(bytes, 12);
  if ((flags & ~kFlagNodeIds) != 0) throw DataError("unknown binary matrix flags");
  const auto rows = get<std::uint64_t>(bytes, 16);
  const auto cols = get<std::uint64_t>(bytes, 24);
  if (rows != 0 && cols > (bytes.size() - kHeaderBytes) / sizeof(double) / rows) {
    throw DataError("binary matrix truncated");
  }
  const std::size_t payload_end = kHeaderBytes + rows * cols * sizeof(double);
  if (flags & kFlagNodeIds) {
    std::size_t offset = payload_end;
    for (std::uint64_t r = 0; r < rows; ++r) {
      if (bytes.size() - offset < sizeof(std::uint32_t)) throw DataError("binary matrix truncated");
      const auto len = get<std::uint32_t>(bytes, offset);
      offset += sizeof(std::uint32_t);
      if (bytes.size() - offset < len) throw DataError("binary matrix truncated");
      m.node_ids.emplace_back(bytes.substr(offset, len));
      offset += len;
    }
    if (offset != bytes.size()) throw DataError("binary matrix has trailing bytes");
  } else if (bytes.size() != payload_end) {
    throw DataError("binary matrix size does not match its header");
  }
  m.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t offset = kHeaderBytes;
  for (Eigen::Index r = 0; r < m.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) {
      m.data(r, c) = get<double>(bytes, offset);
      offset += sizeof(double);
    }
  }
  if (!m.data.allFinite()) throw DataError("matrix contains non-finite values");
  return m;
}

std::string matrix_to_csv(const MatrixFile& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.data.rows(); ++r) {
    if (!m.node_ids.empty()) out << m.node_ids[static_cast<std::size_t>(r)] << ',';
    for (Eigen::Index c = 0; c < m.data.cols(); ++c) {
      if (c > 0) out << ',';
      out << m.data(r, c);
    }
    out << '\n';
  }
  return out.str();
}

void save_matrix(const MatrixFile& m, const std::filesystem::path& path,
                 MatrixEncoding encoding) {
  switch (encoding) {
    case MatrixEncoding::kJson: write_file(path, matrix_to_json(m)); break;
    case MatrixEncoding::kBinary: write_file(path, matrix_to_binary(m)); break;
    case MatrixEncoding::kCsv: write_file(path, matrix_to_csv(m)); break;
  }
}

MatrixFile load_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0) {
    return matrix_from_binary(bytes);
  }
  return matrix_from_json(bytes);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace cikp
