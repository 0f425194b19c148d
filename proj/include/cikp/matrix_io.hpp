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

// Matrix container shared by partial-correlation, transition and embedding
// matrices. Two encodings:
//
//   JSON:   {"format": "cikp-matrix", "version": 1, "kind": "<kind>",
//            "rows": R, "cols": C, "data": [row-major values],
//            "node_ids": [...]}            (node_ids optional)
//
//   Binary: bytes 0..7   ASCII "CIKPMAT1"
//           bytes 8..11  uint32 kind code (see MatrixKind)
//           bytes 12..15 uint32 zero
//           bytes 16..23 uint64 rows
//           bytes 24..31 uint64 cols
//           then rows*cols IEEE-754 float64, row-major.
//           All integers and doubles little-endian.

#ifndef CIKP_MATRIX_IO_HPP_
#define CIKP_MATRIX_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cikp {

enum class MatrixKind : std::uint32_t {
  kGeneric = 0,
  kPartialCorrelation = 1,
  kExp = 2,
  kPos = 3,
  kNeg = 4,
  kMaxNorm = 5,
  kEmbedding = 6,
};

std::string_view to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(std::string_view name);

struct MatrixFile {
  Eigen::MatrixXd data;
  MatrixKind kind = MatrixKind::kGeneric;
  std::vector<std::string> node_ids;  // empty, or one per row
};

enum class MatrixEncoding { kJson, kBinary, kCsv };

std::string matrix_to_json(const MatrixFile& m);
MatrixFile matrix_from_json(std::string_view text);

std::string matrix_to_binary(const MatrixFile& m);
MatrixFile matrix_from_binary(std::string_view bytes);

// CSV is write-only: optional leading node_id column, no header.
std::string matrix_to_csv(const MatrixFile& m);

void save_matrix(const MatrixFile& m, const std::filesystem::path& path,
                 MatrixEncoding encoding);
// Detects the encoding from the magic bytes.
MatrixFile load_matrix(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cikp

#endif  // CIKP_MATRIX_IO_HPP_
