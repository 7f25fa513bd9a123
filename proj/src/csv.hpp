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

#ifndef HWNAS_SRC_CSV_HPP_
#define HWNAS_SRC_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hwnas::csv {

// Unquoted comma-separated rows. Blank lines are skipped; each row keeps the
// 1-based line number it came from for error messages.
struct Row {
  long line = 0;
  std::vector<std::string> fields;
};

std::vector<Row> read_file(const std::filesystem::path& path);
std::vector<std::string> split_line(std::string_view line);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
// Strict parse of the whole field; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

// Writes through a temporary file and renames, so readers never observe a
// half-written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace hwnas::csv

#endif  // HWNAS_SRC_CSV_HPP_
