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

#include <array>
#include <sstream>

#include "csv.hpp"
#include "hwnas/errors.hpp"
#include "hwnas/predictors.hpp"

namespace hwnas {

namespace {

constexpr std::array kCostedOps = {OpKind::kConv1x1, OpKind::kConv3x3,
                                   OpKind::kAvgPool3x3, OpKind::kMaxPool3x3};

OpKind costed_op_from_name(std::string_view name) {
  for (OpKind op : kCostedOps)
    if (op_name(op) == name) return op;
  throw ValidationError("op cost table: unknown op '" + std::string(name) + "'");
}

}  // namespace

LayerwiseCostModel layerwise_from_profile(const DeviceProfile& profile) {
  LayerwiseCostModel m;
  for (OpKind op : kCostedOps) m.per_op_cost[op] = profile.op_cost(op);
  return m;
}

LayerwiseCostModel load_op_costs(const std::filesystem::path& path,
                                 std::string_view device) {
  const std::vector<csv::Row> rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError("op cost table is empty", 1);
  const auto& header = rows.front().fields;
  if (header != std::vector<std::string>{"op_name", "device", "cost_ms"})
    throw SchemaError("op cost table header must be op_name,device,cost_ms",
                      rows.front().line);
  LayerwiseCostModel m;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != 3) throw SchemaError("expected 3 fields", row.line);
    if (row.fields[1] != device) continue;
    const OpKind op = costed_op_from_name(row.fields[0]);
    double cost = 0.0;
    if (!csv::parse_double(row.fields[2], cost) || !(cost > 0.0)) throw SchemaError("op cost must be positive", row.line);
    if (!m.per_op_cost.emplace(op, cost).second)
      throw SchemaError("duplicate op cost for '" + row.fields[0] + "'", row.line);
  }
  if (m.per_op_cost.empty())
    throw LookupError("op cost table has no rows for device '" + std::string(device) +
                      "'");
  return m;
}

void save_op_costs(const std::filesystem::path& path,
                   const std::map<std::string, LayerwiseCostModel>& per_device) {
  std::ostringstream out;
  out << "op_name,device,cost_ms\n";
  for (const auto& [device, model] : per_device)
    for (const auto& [op, cost] : model.per_op_cost)
      out << op_name(op) << ',' << device << ',' << csv::format_double(cost) << '\n';
  csv::write_file_atomic(path, out.str());
}

double layerwise_raw_sum(const LayerwiseCostModel& model, const CellGraph& cell) {
  const CellGraph g = optimize_graph(cell);
  double sum = 0.0;
  for (int i = 0; i < g.num_ops(); ++i) {
    if (!g.is_attached(i)) continue;
    const OpKind op = g.ops[static_cast<std::size_t>(i)];
    if (op == OpKind::kZero || op == OpKind::kSkip) continue;
    const auto it = model.per_op_cost.find(op);
    if (it == model.per_op_cost.end())
      throw LookupError("layer-wise model has no cost for '" +
                        std::string(op_name(op)) + "'");
    sum += it->second;
  }
  return sum;
}

LayerwiseCostModel layerwise_calibrate(const LayerwiseCostModel& model,
                                       std::span<const CalibrationPoint> train) {
  if (train.empty()) throw UsageError("layerwise_calibrate: empty training set");
  double num = 0.0;
  double den = 0.0;
  for (const CalibrationPoint& p : train) {
    const double raw = layerwise_raw_sum(model, p.cell);
    num += raw * (p.measured_ms - model.overhead);
    den += raw * raw;
  }
  if (den == 0.0)
    throw DegenerateError("layerwise_calibrate: every raw op-cost sum is zero");
  LayerwiseCostModel out = model;
  out.scale = num / den;
  if (!(out.scale > 0.0))
    throw DegenerateError("layerwise_calibrate: fitted scale is not positive");
  return out;
}

double layerwise_predict(const LayerwiseCostModel& model, const CellGraph& cell) {
  return model.scale * layerwise_raw_sum(model, cell) + model.overhead;
}

double flops_proxy(const BenchmarkTable& table, std::string_view arch_id) {
  return table.at(arch_id).flops;
}

}  // namespace hwnas
