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

#ifndef HWNAS_MEASUREMENT_HPP_
#define HWNAS_MEASUREMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hwnas {

inline constexpr std::size_t kDefaultGroupSize = 10;

// Wall-clock durations in milliseconds, in the order they were recorded.
struct RawSamples {
  std::vector<double> samples;
  std::size_t group_size = kDefaultGroupSize;
};

struct AggregatedLatency {
  double mean_ms = 0.0;
  double kept_fraction = 1.0;  // samples inside the surviving groups
  std::size_t n_groups = 0;    // groups formed after the first trim
  bool warning = false;        // a trimming stage removed everything
};

// Two-level quartile trimming:
//   1. drop samples outside [Q1, Q3] of all samples,
//   2. average the survivors in chronological groups of group_size,
//   3. drop group means outside their own [Q1, Q3],
//   4. average the remaining group means.
// Quartiles use linear interpolation and the interval is inclusive. A stage
// that would remove every value is skipped and `warning` is set.
// Throws ValidationError on non-positive or non-finite samples and
// UsageError when fewer than group_size samples are given.
AggregatedLatency aggregate(const RawSamples& raw);

// Runs `fn` warmup times untimed, then `runs` timed invocations on a
// monotonic clock. Throws UsageError when runs < 1.
RawSamples time_callable(const std::function<void()>& fn, std::size_t runs,
                         std::size_t warmup, std::size_t group_size = kDefaultGroupSize);

// Samples keyed by (arch_id, device); CSV columns arch_id,device,sample_ms.
using SampleLog = std::map<std::pair<std::string, std::string>, std::vector<double>>;

SampleLog read_sample_log(const std::filesystem::path& path);
void write_sample_log(const std::filesystem::path& path, const SampleLog& log);

}  // namespace hwnas

#endif  // HWNAS_MEASUREMENT_HPP_
