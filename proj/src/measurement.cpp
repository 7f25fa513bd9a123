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

#include "hwnas/measurement.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "hwnas/analysis.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {
namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Indices of values inside the inclusive interquartile interval, in order.
std::vector<std::size_t> interquartile(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= q1 && values[i] <= q3) kept.push_back(i);
  return kept;
}

}  // namespace

AggregatedLatency aggregate(const RawSamples& raw) {
  if (raw.group_size == 0) throw UsageError("group size must be positive");
  if (raw.samples.size() < raw.group_size)
    throw UsageError("aggregate needs at least group_size samples");
  for (double s : raw.samples)
    if (!std::isfinite(s) || s <= 0.0)
      throw ValidationError("latency samples must be positive and finite");

  AggregatedLatency out;
  std::vector<std::size_t> kept = interquartile(raw.samples);
  if (kept.empty()) {
    kept.resize(raw.samples.size());
    std::iota(kept.begin(), kept.end(), 0);
    out.warning = true;
  }

  std::vector<double> group_means;
  std::vector<std::size_t> group_sizes;
  for (std::size_t start = 0; start < kept.size(); start += raw.group_size) {
    const std::size_t end = std::min(start + raw.group_size, kept.size());
    double sum = 0.0;
    for (std::size_t k = start; k < end; ++k) sum += raw.samples[kept[k]];
    group_means.push_back(sum / static_cast<double>(end - start));
    group_sizes.push_back(end - start);
  }
  out.n_groups = group_means.size();

  std::vector<std::size_t> survivors = interquartile(group_means);
  if (survivors.empty()) {
    survivors.resize(group_means.size());
    std::iota(survivors.begin(), survivors.end(), 0);
    out.warning = true;
  }
  std::vector<double> final_means;
  std::size_t kept_samples = 0;
  for (std::size_t g : survivors) {
    final_means.push_back(group_means[g]);
    kept_samples += group_sizes[g];
  }
  out.mean_ms = mean_of(final_means);
  out.kept_fraction =
      static_cast<double>(kept_samples) / static_cast<double>(raw.samples.size());
  return out;
}

RawSamples time_callable(const std::function<void()>& fn, std::size_t runs,
                         std::size_t warmup, std::size_t group_size) {
  if (runs < 1) throw UsageError("time_callable needs runs >= 1");
  using Clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < warmup; ++i) fn();
  RawSamples out;
  out.group_size = group_size;
  out.samples.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    // Clamp to one nanosecond so a coarse clock never yields a zero sample.
    const auto ns = std::max<std::int64_t>(
        1, std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    out.samples.push_back(static_cast<double>(ns) * 1e-6);
  }
  return out;
}

SampleLog read_sample_log(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError("sample log is empty: " + path.string());
  const std::vector<std::string> header = {"arch_id", "device", "sample_ms"};
  if (rows.front().fields != header)
    throw SchemaError("sample log header must be arch_id,device,sample_ms", rows.front().line);
  SampleLog log;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != 3) throw SchemaError("expected 3 columns", row.line);
    double v = 0.0;
    if (!csv::parse_double(row.fields[2], v)) throw SchemaError("bad sample_ms", row.line);
    if (!std::isfinite(v) || v <= 0.0)
      throw SchemaError("sample_ms must be positive", row.line);
    log[{row.fields[0], row.fields[1]}].push_back(v);
  }
  return log;
}

void write_sample_log(const std::filesystem::path& path, const SampleLog& log) {
  std::ostringstream out;
  out << "arch_id,device,sample_ms\n";
  for (const auto& [key, samples] : log)
    for (double s : samples)
      out << key.first << ',' << key.second << ',' << csv::format_double(s) << '\n';
  csv::write_file_atomic(path, out.str());
}

}  // namespace hwnas
