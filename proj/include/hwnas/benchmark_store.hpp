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

#ifndef HWNAS_BENCHMARK_STORE_HPP_
#define HWNAS_BENCHMARK_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hwnas/graph_encoding.hpp"
#include "hwnas/rng.hpp"

namespace hwnas {

enum class AccuracyMetric : std::uint8_t { kValidation, kTest };
enum class AccuracyMode : std::uint8_t { kFixedSeed, kRandomSeed, kMean };

std::string_view to_string(AccuracyMetric metric);
std::string_view to_string(AccuracyMode mode);
AccuracyMetric parse_accuracy_metric(std::string_view s);
AccuracyMode parse_accuracy_mode(std::string_view s);

struct BenchmarkEntry {
  std::string arch_id;
  // NB-101 cell spec (see parse_nb101_cell); empty for NB-201, whose arch_id
  // already is the cell.
  std::string cell;
  std::vector<double> val_accuracy;   // percent, one value per seed
  std::vector<double> test_accuracy;  // percent, one value per seed
  std::map<std::string, double> latency_ms;
  double flops = 0.0;
  double params = 0.0;

  friend bool operator==(const BenchmarkEntry&, const BenchmarkEntry&) = default;
};

// Per-device cost model used by the synthetic generator and, through the
// same per-op costs, by the layer-wise baseline.
struct DeviceProfile {
  std::string name;
  double conv1x1_ms = 0.0;
  double conv3x3_ms = 0.0;
  double pool_ms = 0.0;
  // Weight of the critical path against the plain sum of op costs.
  double parallelism = 0.0;
  double overhead_ms = 0.0;

  double op_cost(OpKind op) const;

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  double noise_sd = 0.4;  // percent, per pseudo-seed
  int num_seeds = 3;
  std::vector<DeviceProfile> devices;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Frozen default profiles: desktop_cpu, desktop_gpu, embedded_gpu.
std::vector<DeviceProfile> default_device_profiles();
SyntheticSpec default_synthetic_spec(std::uint64_t seed = 0);
void validate(const SyntheticSpec& spec);

class BenchmarkTable {
 public:
  BenchmarkTable() = default;
  BenchmarkTable(SearchSpace space, std::vector<std::string> devices);

  SearchSpace space() const { return space_; }
  const std::vector<std::string>& devices() const { return devices_; }
  using EntryMap = std::map<std::string, BenchmarkEntry, std::less<>>;

  const EntryMap& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  bool partial() const { return partial_; }
  const std::optional<SyntheticSpec>& generator() const { return generator_; }

  bool contains(std::string_view arch_id) const;
  // Throws LookupError for unknown ids.
  const BenchmarkEntry& at(std::string_view arch_id) const;
  // Rebuilds the cell graph of an entry.
  CellGraph cell(std::string_view arch_id) const;
  bool has_device(std::string_view device) const;

  // Validates the entry invariants and rejects duplicate ids (UsageError).
  void insert(BenchmarkEntry entry);
  void set_generator(SyntheticSpec spec) { generator_ = std::move(spec); }
  // Recomputes the partial flag against the full enumeration of the space.
  void finalize();

  friend bool operator==(const BenchmarkTable&, const BenchmarkTable&) = default;

 private:
  SearchSpace space_ = SearchSpace::kNb201;
  std::vector<std::string> devices_;
  EntryMap entries_;
  bool partial_ = true;
  std::optional<SyntheticSpec> generator_;
};

// CSV table plus "<path>.meta.json" sidecar. Rows are written sorted by
// arch_id with shortest round-trip number formatting, so save is canonical.
void save_table(const BenchmarkTable& table, const std::filesystem::path& path);
BenchmarkTable load_table(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

// Column mapping for ingesting externally produced tables (for example the
// public latency dataset) whose headers differ from ours.
struct TableMapping {
  SearchSpace space = SearchSpace::kNb201;
  std::string arch_id_column = "arch_id";
  std::string cell_column;  // NB-101 only
  std::vector<std::string> val_accuracy_columns;
  std::vector<std::string> test_accuracy_columns;
  std::map<std::string, std::string> latency_columns;  // device -> column
  double latency_scale = 1.0;  // multiplies raw values into milliseconds
  std::string flops_column = "flops";
  std::string params_column = "params";
};

TableMapping parse_table_mapping(std::string_view json_text);
BenchmarkTable load_table_mapped(const std::filesystem::path& path,
                                 const TableMapping& mapping);

// Closed-form synthetic ground truth for one cell.
struct SyntheticCellStats {
  double hidden_accuracy = 0.0;  // noise-free percent
  double flops = 0.0;
  double params = 0.0;
};

// f * critical_path + (1 - f) * sum + overhead over the optimized cell.
double synthetic_latency(const CellGraph& cell, const DeviceProfile& profile);
SyntheticCellStats synthetic_cell_stats(const CellGraph& cell);

BenchmarkTable synth_table(const SyntheticSpec& spec, SearchSpace space);
BenchmarkTable synth_table(const SyntheticSpec& spec,
                           std::span<const CellGraph> cells);

// fixed_seed returns the first stored seed, random_seed samples a stored seed
// uniformly (rng required), mean averages the seeds.
double query_accuracy(const BenchmarkTable& table, std::string_view arch_id,
                      AccuracyMode mode,
                      AccuracyMetric metric = AccuracyMetric::kValidation,
                      Rng* rng = nullptr);
double query_latency(const BenchmarkTable& table, std::string_view arch_id,
                     std::string_view device);

}  // namespace hwnas

#endif  // HWNAS_BENCHMARK_STORE_HPP_
