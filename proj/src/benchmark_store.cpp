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

#include "hwnas/benchmark_store.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "hwnas/errors.hpp"
#include "json.hpp"

namespace hwnas {

namespace {

using nlohmann::json;

constexpr int kTableFormatVersion = 1;

// Whole-network contributions of one searchable op (stem, reductions and
// classifier are folded into the base).
constexpr double kBaseFlops = 7.8e6;
constexpr double kConv1x1Flops = 3.9e6;
constexpr double kConv3x3Flops = 35.0e6;
constexpr double kPoolFlops = 0.33e6;
constexpr double kBaseParams = 73.0e3;
constexpr double kConv1x1Params = 23.0e3;
constexpr double kConv3x3Params = 209.0e3;

// Hidden accuracy model: per-slot value of a 3x3 convolution (slots feeding
// the output matter more), diminishing returns on many 3x3 convolutions, and
// bonuses for depth, path diversity and a residual input->output edge.
constexpr std::array<double, kNb201OpSlots> kNb201SlotWeight = {0.9, 0.8, 1.0,
                                                                0.7, 0.95, 1.15};
constexpr double kConv1x1Value = 0.55;
constexpr double kPoolValue = 0.12;
constexpr double kPoolIntoOutputPenalty = 0.25;
constexpr double kConv3x3Saturation = 0.06;
constexpr double kDepthBonus = 0.45;
constexpr double kPathBonus = 0.1;
constexpr double kResidualBonus = 0.5;
constexpr double kChanceAccuracy = 10.0;
constexpr double kAccuracySpan = 84.5;
constexpr double kScoreScale = 2.3;
constexpr double kTestAccuracyShift = -0.6;

struct CellShape {
  int conv1x1 = 0;
  int conv3x3 = 0;
  int pool = 0;
  int depth = 0;  // max op nodes along an input->output path
  int paths = 0;
  bool residual = false;
  bool connected = false;
  double slot_value = 0.0;
  double pool_into_output = 0.0;
};

bool is_pool(OpKind op) {
  return op == OpKind::kAvgPool3x3 || op == OpKind::kMaxPool3x3;
}

CellShape analyze(const CellGraph& optimized) {
  CellShape shape;
  const int n = optimized.num_nodes();
  const int out = optimized.output_node();
  // Node order is topological for both spaces.
  std::vector<int> depth(n, -1);
  std::vector<long> paths(n, 0);
  depth[0] = 0;
  paths[0] = 1;
  for (int v = 1; v < n; ++v) {
    for (const auto& [src, dst] : optimized.edges) {
      if (dst != v || depth[src] < 0) continue;
      const int step = v == out ? 0 : 1;
      depth[v] = std::max(depth[v], depth[src] + step);
      paths[v] += paths[src];
    }
  }
  shape.connected = depth[out] >= 0;
  if (!shape.connected) return shape;
  shape.depth = depth[out];
  shape.paths = static_cast<int>(paths[out]);
  shape.residual = optimized.has_edge(0, out);
  for (int i = 0; i < optimized.num_ops(); ++i) {
    if (!optimized.is_attached(i)) continue;
    const OpKind op = optimized.ops[i];
    const double weight = optimized.space == SearchSpace::kNb201
                              ? kNb201SlotWeight[i]
                              : 1.0;
    if (op == OpKind::kConv3x3) {
      ++shape.conv3x3;
      shape.slot_value += weight;
    } else if (op == OpKind::kConv1x1) {
      ++shape.conv1x1;
      shape.slot_value += kConv1x1Value * weight;
    } else if (is_pool(op)) {
      ++shape.pool;
      shape.slot_value += kPoolValue;
      if (optimized.has_edge(i + 1, out)) {
        shape.pool_into_output += kPoolIntoOutputPenalty;
      }
    }
  }
  return shape;
}

void check_finite_positive(double v, const std::string& what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ValidationError(what + " must be finite and positive");
  }
}

json spec_to_json(const SyntheticSpec& spec) {
  json devices = json::array();
  for (const auto& d : spec.devices) {
    devices.push_back({{"name", d.name},
                       {"conv1x1_ms", d.conv1x1_ms},
                       {"conv3x3_ms", d.conv3x3_ms},
                       {"pool_ms", d.pool_ms},
                       {"parallelism", d.parallelism},
                       {"overhead_ms", d.overhead_ms}});
  }
  return {{"seed", spec.seed},
          {"noise_sd", spec.noise_sd},
          {"num_seeds", spec.num_seeds},
          {"devices", devices}};
}

SyntheticSpec spec_from_json(const json& j) {
  SyntheticSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.noise_sd = j.at("noise_sd").get<double>();
  spec.num_seeds = j.at("num_seeds").get<int>();
  for (const auto& d : j.at("devices")) {
    spec.devices.push_back(DeviceProfile{d.at("name").get<std::string>(),
                                         d.at("conv1x1_ms").get<double>(),
                                         d.at("conv3x3_ms").get<double>(),
                                         d.at("pool_ms").get<double>(),
                                         d.at("parallelism").get<double>(),
                                         d.at("overhead_ms").get<double>()});
  }
  return spec;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int find_column(const std::vector<std::string>& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

double parse_field(const csv::Row& row, int column, const std::string& name) {
  double v = 0.0;
  if (column >= static_cast<int>(row.fields.size()) ||
      !csv::parse_double(row.fields[column], v)) {
    throw SchemaError("bad numeric value in column " + name, row.line);
  }
  return v;
}

}  // namespace

std::string_view to_string(AccuracyMetric metric) {
  return metric == AccuracyMetric::kValidation ? "val" : "test";
}

std::string_view to_string(AccuracyMode mode) {
  switch (mode) {
    case AccuracyMode::kFixedSeed:
      return "fixed_seed";
    case AccuracyMode::kRandomSeed:
      return "random_seed";
    case AccuracyMode::kMean:
      return "mean";
  }
  return "?";
}

AccuracyMetric parse_accuracy_metric(std::string_view s) {
  if (s == "val") return AccuracyMetric::kValidation;
  if (s == "test") return AccuracyMetric::kTest;
  throw ParseError("unknown accuracy metric '" + std::string(s) + "'");
}

AccuracyMode parse_accuracy_mode(std::string_view s) {
  if (s == "fixed_seed") return AccuracyMode::kFixedSeed;
  if (s == "random_seed") return AccuracyMode::kRandomSeed;
  if (s == "mean") return AccuracyMode::kMean;
  throw ParseError("unknown accuracy mode '" + std::string(s) + "'");
}

double DeviceProfile::op_cost(OpKind op) const {
  switch (op) {
    case OpKind::kConv1x1:
      return conv1x1_ms;
    case OpKind::kConv3x3:
      return conv3x3_ms;
    case OpKind::kAvgPool3x3:
    case OpKind::kMaxPool3x3:
      return pool_ms;
    default:
      return 0.0;
  }
}

std::vector<DeviceProfile> default_device_profiles() {
  return {
      DeviceProfile{"desktop_cpu", 0.55, 0.90, 0.62, 0.30, 1.10},
      DeviceProfile{"desktop_gpu", 0.98, 1.30, 1.08, 0.65, 1.00},
      DeviceProfile{"embedded_gpu", 2.60, 4.10, 2.90, 0.45, 4.20},
  };
}

SyntheticSpec default_synthetic_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.devices = default_device_profiles();
  return spec;
}

void validate(const SyntheticSpec& spec) {
  if (!(spec.noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
  if (spec.num_seeds < 1) throw ValidationError("num_seeds must be >= 1");
  if (spec.devices.empty()) throw ValidationError("no device profiles");
  std::set<std::string> names;
  for (const auto& d : spec.devices) {
    if (d.name.empty() || !names.insert(d.name).second) {
      throw ValidationError("device names must be unique and non-empty");
    }
    check_finite_positive(d.conv1x1_ms, d.name + " conv1x1 cost");
    check_finite_positive(d.conv3x3_ms, d.name + " conv3x3 cost");
    check_finite_positive(d.pool_ms, d.name + " pool cost");
    if (!(d.parallelism >= 0.0 && d.parallelism <= 1.0)) {
      throw ValidationError(d.name + " parallelism must lie in [0, 1]");
    }
    if (!(d.overhead_ms > 0.0) || !std::isfinite(d.overhead_ms)) {
      throw ValidationError(d.name + " overhead must be positive");
    }
  }
}

BenchmarkTable::BenchmarkTable(SearchSpace space,
                               std::vector<std::string> devices)
    : space_(space), devices_(std::move(devices)) {
  std::set<std::string> unique(devices_.begin(), devices_.end());
  if (unique.size() != devices_.size()) {
    throw UsageError("duplicate device names");
  }
}

bool BenchmarkTable::contains(std::string_view arch_id) const {
  return entries_.find(arch_id) != entries_.end();
}

const BenchmarkEntry& BenchmarkTable::at(std::string_view arch_id) const {
  const auto it = entries_.find(arch_id);
  if (it == entries_.end()) {
    throw LookupError("unknown architecture '" + std::string(arch_id) + "'");
  }
  return it->second;
}

CellGraph BenchmarkTable::cell(std::string_view arch_id) const {
  const BenchmarkEntry& entry = at(arch_id);
  if (space_ == SearchSpace::kNb201) return parse_arch_string(entry.arch_id);
  return parse_nb101_cell(entry.cell, entry.arch_id);
}

bool BenchmarkTable::has_device(std::string_view device) const {
  return std::find(devices_.begin(), devices_.end(), device) != devices_.end();
}

void BenchmarkTable::insert(BenchmarkEntry entry) {
  if (entry.val_accuracy.empty()) {
    throw ValidationError("entry " + entry.arch_id + " has no accuracy seeds");
  }
  for (const auto* seeds : {&entry.val_accuracy, &entry.test_accuracy}) {
    for (double a : *seeds) {
      if (!(a >= 0.0 && a <= 100.0)) {
        throw ValidationError("accuracy outside [0, 100] for " + entry.arch_id);
      }
    }
  }
  if (entry.latency_ms.size() != devices_.size()) {
    throw ValidationError("entry " + entry.arch_id +
                          " does not cover every device");
  }
  for (const auto& device : devices_) {
    const auto it = entry.latency_ms.find(device);
    if (it == entry.latency_ms.end()) {
      throw ValidationError("entry " + entry.arch_id + " lacks device " + device);
    }
    check_finite_positive(it->second, "latency of " + entry.arch_id);
  }
  if (!(entry.flops >= 0.0) || !(entry.params >= 0.0)) {
    throw ValidationError("flops/params must be non-negative");
  }
  if (space_ == SearchSpace::kNb201) {
    const CellGraph cell = parse_arch_string(entry.arch_id);
    if (cell.arch_id != entry.arch_id) {
      throw ValidationError("non-canonical architecture string " + entry.arch_id);
    }
  } else {
    parse_nb101_cell(entry.cell, entry.arch_id);
  }
  if (contains(entry.arch_id)) {
    throw UsageError("duplicate arch_id " + entry.arch_id);
  }
  std::string key = entry.arch_id;
  entries_.emplace(std::move(key), std::move(entry));
}

void BenchmarkTable::finalize() {
  constexpr std::size_t kNb101SpaceSize = 423624;
  const std::size_t full = space_ == SearchSpace::kNb201
                               ? static_cast<std::size_t>(kNb201SpaceSize)
                               : kNb101SpaceSize;
  partial_ = entries_.size() != full;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".meta.json";
  return p;
}

void save_table(const BenchmarkTable& table, const std::filesystem::path& path) {
  std::size_t val_seeds = 0, test_seeds = 0;
  for (const auto& [id, e] : table.entries()) {
    val_seeds = std::max(val_seeds, e.val_accuracy.size());
    test_seeds = std::max(test_seeds, e.test_accuracy.size());
  }
  const bool with_cell = table.space() == SearchSpace::kNb101;

  std::string out = "arch_id,space";
  for (std::size_t k = 0; k < val_seeds; ++k) {
    out += ",val_acc_seed_" + std::to_string(k);
  }
  for (std::size_t k = 0; k < test_seeds; ++k) {
    out += ",test_acc_seed_" + std::to_string(k);
  }
  for (const auto& d : table.devices()) out += ",lat_" + d;
  out += ",flops,params";
  if (with_cell) out += ",cell";
  out += '\n';

  const std::string space(to_string(table.space()));
  for (const auto& [id, e] : table.entries()) {
    out += id;
    out += ',';
    out += space;
    for (std::size_t k = 0; k < val_seeds; ++k) {
      out += ',';
      if (k < e.val_accuracy.size()) out += csv::format_double(e.val_accuracy[k]);
    }
    for (std::size_t k = 0; k < test_seeds; ++k) {
      out += ',';
      if (k < e.test_accuracy.size()) {
        out += csv::format_double(e.test_accuracy[k]);
      }
    }
    for (const auto& d : table.devices()) {
      out += ',';
      out += csv::format_double(e.latency_ms.at(d));
    }
    out += ',' + csv::format_double(e.flops) + ',' + csv::format_double(e.params);
    if (with_cell) out += ',' + e.cell;
    out += '\n';
  }
  csv::write_file_atomic(path, out);

  json meta = {{"format", "hwnas-benchmark"},
               {"version", kTableFormatVersion},
               {"space", space},
               {"devices", table.devices()},
               {"units",
                {{"latency", "ms"},
                 {"accuracy", "percent"},
                 {"flops", "count"},
                 {"params", "count"}}},
               {"partial", table.partial()}};
  if (table.generator()) meta["generator"] = spec_to_json(*table.generator());
  csv::write_file_atomic(sidecar_path(path), meta.dump(2) + "\n");
}

BenchmarkTable load_table(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError("empty benchmark file", 1);
  const auto& header = rows.front().fields;

  const int arch_col = find_column(header, "arch_id");
  const int space_col = find_column(header, "space");
  const int flops_col = find_column(header, "flops");
  const int params_col = find_column(header, "params");
  const int cell_col = find_column(header, "cell");
  std::vector<int> val_cols, test_cols;
  std::vector<std::pair<std::string, int>> lat_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& h = header[c];
    if (h.starts_with("val_acc_seed_")) val_cols.push_back(c);
    if (h.starts_with("test_acc_seed_")) test_cols.push_back(c);
    if (h.starts_with("lat_")) lat_cols.emplace_back(h.substr(4), c);
  }
  const auto require = [&](bool ok, const std::string& column) {
    if (!ok) throw SchemaError("missing column " + column, rows.front().line);
  };
  require(arch_col >= 0, "arch_id");
  require(space_col >= 0, "space");
  require(!val_cols.empty(), "val_acc_seed_0");
  require(!lat_cols.empty(), "lat_<device>");
  require(flops_col >= 0, "flops");
  require(params_col >= 0, "params");

  SearchSpace space = SearchSpace::kNb201;
  std::vector<std::string> devices;
  for (const auto& [device, col] : lat_cols) devices.push_back(device);
  std::optional<SyntheticSpec> generator;

  const auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    const json meta = json::parse(read_text(meta_path));
    if (meta.value("version", 0) != kTableFormatVersion) {
      throw SchemaError("unsupported table format version in " +
                        meta_path.string());
    }
    space = parse_search_space(meta.at("space").get<std::string>());
    const auto meta_devices = meta.at("devices").get<std::vector<std::string>>();
    if (meta_devices != devices) {
      throw SchemaError("sidecar device list does not match lat_ columns");
    }
    if (meta.contains("generator")) generator = spec_from_json(meta["generator"]);
  } else if (rows.size() > 1 && space_col < static_cast<int>(rows[1].fields.size())) {
    space = parse_search_space(rows[1].fields[space_col]);
  }
  if (space == SearchSpace::kNb101) require(cell_col >= 0, "cell");

  BenchmarkTable table(space, devices);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw SchemaError("expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(row.fields.size()),
                        row.line);
    }
    if (row.fields[space_col] != to_string(space)) {
      throw SchemaError("space column disagrees with table space", row.line);
    }
    BenchmarkEntry e;
    e.arch_id = row.fields[arch_col];
    if (cell_col >= 0) e.cell = row.fields[cell_col];
    for (int c : val_cols) {
      if (!row.fields[c].empty()) {
        e.val_accuracy.push_back(parse_field(row, c, header[c]));
      }
    }
    for (int c : test_cols) {
      if (!row.fields[c].empty()) {
        e.test_accuracy.push_back(parse_field(row, c, header[c]));
      }
    }
    for (const auto& [device, c] : lat_cols) {
      const double v = parse_field(row, c, header[c]);
      if (!(v > 0.0)) throw SchemaError("non-positive latency for " + device, row.line);
      e.latency_ms[device] = v;
    }
    e.flops = parse_field(row, flops_col, "flops");
    e.params = parse_field(row, params_col, "params");
    if (table.contains(e.arch_id)) {
      throw SchemaError("duplicate arch_id " + e.arch_id, row.line);
    }
    try {
      table.insert(std::move(e));
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& err) {
      throw SchemaError(err.what(), row.line);
    }
  }
  if (generator) table.set_generator(*generator);
  table.finalize();
  return table;
}

TableMapping parse_table_mapping(std::string_view json_text) {
  const json j = json::parse(json_text);
  TableMapping m;
  m.space = parse_search_space(j.value("space", std::string("nb201")));
  m.arch_id_column = j.value("arch_id", m.arch_id_column);
  m.cell_column = j.value("cell", m.cell_column);
  m.val_accuracy_columns =
      j.value("val_accuracy", std::vector<std::string>{});
  m.test_accuracy_columns =
      j.value("test_accuracy", std::vector<std::string>{});
  m.latency_columns =
      j.value("latency", std::map<std::string, std::string>{});
  m.latency_scale = j.value("latency_scale", 1.0);
  m.flops_column = j.value("flops", m.flops_column);
  m.params_column = j.value("params", m.params_column);
  if (m.val_accuracy_columns.empty() || m.latency_columns.empty()) {
    throw ConfigError("mapping needs val_accuracy and latency columns");
  }
  return m;
}

BenchmarkTable load_table_mapped(const std::filesystem::path& path,
                                 const TableMapping& mapping) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError("empty benchmark file", 1);
  const auto& header = rows.front().fields;
  const auto column = [&](const std::string& name) {
    const int c = find_column(header, name);
    if (c < 0) throw SchemaError("missing column " + name, rows.front().line);
    return c;
  };
  const int arch_col = column(mapping.arch_id_column);
  const int cell_col = mapping.space == SearchSpace::kNb101
                           ? column(mapping.cell_column)
                           : -1;
  std::vector<int> val_cols, test_cols;
  for (const auto& c : mapping.val_accuracy_columns) val_cols.push_back(column(c));
  for (const auto& c : mapping.test_accuracy_columns) test_cols.push_back(column(c));
  std::vector<std::string> devices;
  std::vector<int> lat_cols;
  for (const auto& [device, c] : mapping.latency_columns) {
    devices.push_back(device);
    lat_cols.push_back(column(c));
  }
  const int flops_col = column(mapping.flops_column);
  const int params_col = column(mapping.params_column);

  BenchmarkTable table(mapping.space, devices);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw SchemaError("field count mismatch", row.line);
    }
    BenchmarkEntry e;
    e.arch_id = row.fields[arch_col];
    if (cell_col >= 0) e.cell = row.fields[cell_col];
    for (int c : val_cols) e.val_accuracy.push_back(parse_field(row, c, header[c]));
    for (int c : test_cols) e.test_accuracy.push_back(parse_field(row, c, header[c]));
    for (std::size_t d = 0; d < devices.size(); ++d) {
      const double v = parse_field(row, lat_cols[d], header[lat_cols[d]]) *
                       mapping.latency_scale;
      if (!(v > 0.0)) {
        throw SchemaError("non-positive latency for " + devices[d], row.line);
      }
      e.latency_ms[devices[d]] = v;
    }
    e.flops = parse_field(row, flops_col, header[flops_col]);
    e.params = parse_field(row, params_col, header[params_col]);
    if (table.contains(e.arch_id)) {
      throw SchemaError("duplicate arch_id " + e.arch_id, row.line);
    }
    try {
      table.insert(std::move(e));
    } catch (const Error& err) {
      throw SchemaError(err.what(), row.line);
    }
  }
  table.finalize();
  return table;
}

double synthetic_latency(const CellGraph& cell, const DeviceProfile& profile) {
  const CellGraph g = optimize_graph(cell);
  const int n = g.num_nodes();
  std::vector<double> node_cost(n, 0.0);
  double total = 0.0;
  for (int i = 0; i < g.num_ops(); ++i) {
    if (!g.is_attached(i)) continue;
    node_cost[i + 1] = profile.op_cost(g.ops[i]);
    total += node_cost[i + 1];
  }
  // Longest path by accumulated cost; edges always point to higher indices.
  std::vector<double> longest(n, -1.0);
  longest[0] = 0.0;
  for (int v = 1; v < n; ++v) {
    for (const auto& [src, dst] : g.edges) {
      if (dst == v && longest[src] >= 0.0) {
        longest[v] = std::max(longest[v], longest[src] + node_cost[v]);
      }
    }
  }
  const double critical = std::max(longest[g.output_node()], 0.0);
  return profile.parallelism * critical + (1.0 - profile.parallelism) * total +
         profile.overhead_ms;
}

SyntheticCellStats synthetic_cell_stats(const CellGraph& cell) {
  const CellGraph g = optimize_graph(cell);
  const CellShape shape = analyze(g);
  SyntheticCellStats stats;
  stats.flops = kBaseFlops + shape.conv1x1 * kConv1x1Flops +
                shape.conv3x3 * kConv3x3Flops + shape.pool * kPoolFlops;
  stats.params = kBaseParams + shape.conv1x1 * kConv1x1Params +
                 shape.conv3x3 * kConv3x3Params;
  if (!shape.connected) {
    stats.hidden_accuracy = kChanceAccuracy;
    return stats;
  }
  const double score =
      shape.slot_value - kConv3x3Saturation * shape.conv3x3 * shape.conv3x3 +
      kDepthBonus * std::max(shape.depth - 1, 0) +
      kPathBonus * std::min(shape.paths, 4) +
      (shape.residual ? kResidualBonus : 0.0) - shape.pool_into_output;
  stats.hidden_accuracy =
      kChanceAccuracy +
      kAccuracySpan * (1.0 - std::exp(-std::max(score, 0.0) / kScoreScale));
  return stats;
}

BenchmarkTable synth_table(const SyntheticSpec& spec,
                           std::span<const CellGraph> cells) {
  validate(spec);
  std::vector<std::string> devices;
  for (const auto& d : spec.devices) devices.push_back(d.name);
  const SearchSpace space =
      cells.empty() ? SearchSpace::kNb201 : cells.front().space;
  BenchmarkTable table(space, devices);
  for (const CellGraph& cell : cells) {
    const SyntheticCellStats stats = synthetic_cell_stats(cell);
    BenchmarkEntry e;
    e.arch_id = cell.arch_id;
    if (space == SearchSpace::kNb101) e.cell = nb101_cell_string(cell);
    Rng rng(derive_seed(spec.seed, "accuracy:" + cell.arch_id));
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto draw = [&](double mean) {
      const double v = mean + spec.noise_sd * noise(rng);
      return std::clamp(v, 0.0, 100.0);
    };
    for (int k = 0; k < spec.num_seeds; ++k) {
      e.val_accuracy.push_back(draw(stats.hidden_accuracy));
    }
    for (int k = 0; k < spec.num_seeds; ++k) {
      e.test_accuracy.push_back(
          draw(std::max(stats.hidden_accuracy + kTestAccuracyShift, 0.0)));
    }
    for (const auto& d : spec.devices) {
      e.latency_ms[d.name] = synthetic_latency(cell, d);
    }
    e.flops = stats.flops;
    e.params = stats.params;
    table.insert(std::move(e));
  }
  table.set_generator(spec);
  table.finalize();
  return table;
}

BenchmarkTable synth_table(const SyntheticSpec& spec, SearchSpace space) {
  if (space != SearchSpace::kNb201) {
    throw UnsupportedError(
        "synthetic NB-101 tables need an explicit cell list");
  }
  std::vector<CellGraph> cells;
  cells.reserve(kNb201SpaceSize);
  for (CellGraph cell : enumerate_nb201()) cells.push_back(std::move(cell));
  return synth_table(spec, cells);
}

double query_accuracy(const BenchmarkTable& table, std::string_view arch_id,
                      AccuracyMode mode, AccuracyMetric metric, Rng* rng) {
  const BenchmarkEntry& e = table.at(arch_id);
  const auto& seeds =
      metric == AccuracyMetric::kValidation ? e.val_accuracy : e.test_accuracy;
  if (seeds.empty()) {
    throw LookupError("no " + std::string(to_string(metric)) +
                      " accuracy stored for " + e.arch_id);
  }
  switch (mode) {
    case AccuracyMode::kFixedSeed:
      return seeds.front();
    case AccuracyMode::kRandomSeed: {
      if (rng == nullptr) throw UsageError("random_seed mode needs an rng");
      std::uniform_int_distribution<std::size_t> pick(0, seeds.size() - 1);
      return seeds[pick(*rng)];
    }
    case AccuracyMode::kMean:
      return std::accumulate(seeds.begin(), seeds.end(), 0.0) /
             static_cast<double>(seeds.size());
  }
  return seeds.front();
}

double query_latency(const BenchmarkTable& table, std::string_view arch_id,
                     std::string_view device) {
  const BenchmarkEntry& e = table.at(arch_id);
  const auto it = e.latency_ms.find(std::string(device));
  if (it == e.latency_ms.end()) {
    throw LookupError("unknown device '" + std::string(device) + "'");
  }
  return it->second;
}

}  // namespace hwnas
