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

#ifndef CIKP_ERROR_HPP_
#define CIKP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cikp {

// Invalid argument or configuration supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, JSON documents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A factorization or solve failed, or a numerical invariant was violated.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cikp

#endif  // CIKP_ERROR_HPP_
