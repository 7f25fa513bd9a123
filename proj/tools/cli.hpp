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

#ifndef HWNAS_TOOLS_CLI_HPP_
#define HWNAS_TOOLS_CLI_HPP_

#include <string>
#include <vector>

namespace hwnas::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // I/O or internal failure
inline constexpr int kExitUsage = 2;        // bad flags, config or usage
inline constexpr int kExitInfeasible = 3;   // infeasible or degenerate input

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace hwnas::cli

#endif  // HWNAS_TOOLS_CLI_HPP_
