// Copyright 2026 The hwnas Authors.
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

#ifndef HWNAS_ERRORS_HPP_
#define HWNAS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hwnas {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input (architecture strings, CSV rows, flags).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Syntactically valid input with invalid content (unknown op names, cycles).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Matrix or tensor shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// API misuse: empty datasets, stale tapes, duplicate ids.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Unknown architecture id or device name.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Benchmark file that violates the table schema.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, long row)
      : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what),
        row_(row) {}
  explicit SchemaError(const std::string& what) : SchemaError(what, -1) {}

  long row() const noexcept { return row_; }

 private:
  long row_;
};

// Inconsistent configuration values (budgets, splits, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A constraint that no candidate satisfies.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate input (all-zero calibration sums, constant vectors).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Operation not available for the requested search space.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwnas

#endif  // HWNAS_ERRORS_HPP_
