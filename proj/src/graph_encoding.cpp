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

#include "hwnas/graph_encoding.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "hwnas/errors.hpp"

namespace hwnas {

namespace {

// (source tensor, destination tensor) of each NB-201 edge label O1..O6.
constexpr std::array<std::pair<int, int>, kNb201OpSlots> kNb201TensorEdges = {
    {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}};
constexpr int kNb201OutputTensor = 3;

struct Nb201Name {
  std::string_view name;
  OpKind op;
};

constexpr std::array<Nb201Name, 5> kNb201Names = {{
    {"none", OpKind::kZero},
    {"skip_connect", OpKind::kSkip},
    {"nor_conv_1x1", OpKind::kConv1x1},
    {"nor_conv_3x3", OpKind::kConv3x3},
    {"avg_pool_3x3", OpKind::kAvgPool3x3},
}};

struct Nb101Name {
  std::string_view name;
  OpKind op;
};

constexpr std::array<Nb101Name, 3> kNb101Names = {{
    {"conv1x1-bn-relu", OpKind::kConv1x1},
    {"conv3x3-bn-relu", OpKind::kConv3x3},
    {"maxpool3x3", OpKind::kMaxPool3x3},
}};

std::string_view nb201_label(OpKind op) {
  for (const auto& entry : kNb201Names) {
    if (entry.op == op) return entry.name;
  }
  throw ValidationError("operation " + std::string(op_name(op)) +
                        " is not an NB-201 edge label");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

void sort_edges(std::vector<CellEdge>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

int feature_column(OpKind op) {
  switch (op) {
    case OpKind::kConv1x1:
      return 0;
    case OpKind::kConv3x3:
      return 1;
    case OpKind::kAvgPool3x3:
    case OpKind::kMaxPool3x3:
      return 2;
    case OpKind::kInput:
      return 3;
    case OpKind::kOutput:
      return 4;
    case OpKind::kGlobal:
      return 5;
    default:
      return -1;  // typeless
  }
}

}  // namespace

std::string_view to_string(SearchSpace space) {
  return space == SearchSpace::kNb201 ? "nb201" : "nb101";
}

SearchSpace parse_search_space(std::string_view name) {
  if (name == "nb201") return SearchSpace::kNb201;
  if (name == "nb101") return SearchSpace::kNb101;
  throw ParseError("unknown search space '" + std::string(name) + "'");
}

std::string_view op_name(OpKind op) {
  switch (op) {
    case OpKind::kZero:
      return "zero";
    case OpKind::kSkip:
      return "skip";
    case OpKind::kConv1x1:
      return "conv1x1";
    case OpKind::kConv3x3:
      return "conv3x3";
    case OpKind::kAvgPool3x3:
      return "avgpool3x3";
    case OpKind::kMaxPool3x3:
      return "maxpool3x3";
    case OpKind::kInput:
      return "input";
    case OpKind::kOutput:
      return "output";
    case OpKind::kGlobal:
      return "global";
  }
  return "?";
}

bool is_searchable(OpKind op, SearchSpace space) {
  if (space == SearchSpace::kNb201) {
    return std::find(std::begin(kNb201Ops), std::end(kNb201Ops), op) !=
           std::end(kNb201Ops);
  }
  return op == OpKind::kConv1x1 || op == OpKind::kConv3x3 ||
         op == OpKind::kMaxPool3x3;
}

bool CellGraph::has_edge(int src, int dst) const {
  return std::binary_search(edges.begin(), edges.end(), CellEdge{src, dst});
}

CellGraph parse_arch_string(std::string_view s) {
  const auto groups = split(s, '+');
  if (groups.size() != 3) {
    throw ParseError("architecture string must have 3 '+'-separated groups: '" +
                     std::string(s) + "'");
  }
  std::vector<OpKind> ops;
  ops.reserve(kNb201OpSlots);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string_view group = groups[g];
    if (group.size() < 2 || group.front() != '|' || group.back() != '|') {
      throw ParseError("malformed group '" + std::string(group) + "'");
    }
    const auto tokens = split(group.substr(1, group.size() - 2), '|');
    if (tokens.size() != g + 1) {
      throw ParseError("group '" + std::string(group) + "' must contain " +
                       std::to_string(g + 1) + " edges");
    }
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const std::string_view token = tokens[t];
      const std::size_t tilde = token.find('~');
      if (tilde == std::string_view::npos || tilde == 0 ||
          token.substr(tilde + 1) != std::to_string(t)) {
        throw ParseError("malformed edge token '" + std::string(token) + "'");
      }
      const std::string_view name = token.substr(0, tilde);
      const auto it = std::find_if(
          kNb201Names.begin(), kNb201Names.end(),
          [&](const Nb201Name& entry) { return entry.name == name; });
      if (it == kNb201Names.end()) {
        throw ValidationError("unknown NB-201 operation '" + std::string(name) +
                              "'");
      }
      ops.push_back(it->op);
    }
  }
  return make_nb201_cell(ops);
}

std::string nb201_arch_string(std::span<const OpKind> ops) {
  if (ops.size() != kNb201OpSlots) {
    throw DimensionError("NB-201 cells have exactly 6 edge labels");
  }
  std::string out;
  std::size_t k = 0;
  for (int group = 0; group < 3; ++group) {
    if (group > 0) out += '+';
    out += '|';
    for (int src = 0; src <= group; ++src) {
      out += nb201_label(ops[k++]);
      out += '~';
      out += std::to_string(src);
      out += '|';
    }
  }
  return out;
}

CellGraph make_nb201_cell(std::span<const OpKind> ops) {
  CellGraph cell;
  cell.space = SearchSpace::kNb201;
  cell.arch_id = nb201_arch_string(ops);
  cell.ops.assign(ops.begin(), ops.end());
  cell.detached.assign(kNb201OpSlots, false);
  const int output = cell.output_node();
  for (int a = 0; a < kNb201OpSlots; ++a) {
    const auto [src, dst] = kNb201TensorEdges[a];
    if (src == 0) cell.edges.emplace_back(0, a + 1);
    if (dst == kNb201OutputTensor) cell.edges.emplace_back(a + 1, output);
    for (int b = 0; b < kNb201OpSlots; ++b) {
      if (kNb201TensorEdges[b].first == dst) cell.edges.emplace_back(a + 1, b + 1);
    }
  }
  sort_edges(cell.edges);
  return cell;
}

int nb201_index(const CellGraph& cell) {
  if (cell.space != SearchSpace::kNb201 || cell.num_ops() != kNb201OpSlots) {
    throw UsageError("nb201_index requires an NB-201 cell");
  }
  int index = 0;
  for (OpKind op : cell.ops) {
    const auto it = std::find(std::begin(kNb201Ops), std::end(kNb201Ops), op);
    if (it == std::end(kNb201Ops)) {
      throw ValidationError("not an NB-201 operation: " +
                            std::string(op_name(op)));
    }
    index = index * 5 + static_cast<int>(it - std::begin(kNb201Ops));
  }
  return index;
}

CellGraph nb201_cell_from_index(int index) {
  if (index < 0 || index >= kNb201SpaceSize) {
    throw UsageError("NB-201 index out of range: " + std::to_string(index));
  }
  std::array<OpKind, kNb201OpSlots> ops{};
  for (int slot = kNb201OpSlots - 1; slot >= 0; --slot) {
    ops[slot] = kNb201Ops[index % 5];
    index /= 5;
  }
  return make_nb201_cell(ops);
}

CellGraph parse_nb101_cell(std::string_view spec, std::string arch_id) {
  const std::size_t semi = spec.find(';');
  if (semi == std::string_view::npos) {
    throw ParseError("NB-101 cell must be '<ops>;<adjacency>': '" +
                     std::string(spec) + "'");
  }
  const auto names = split(spec.substr(0, semi), ',');
  const auto rows = split(spec.substr(semi + 1), ',');
  const int n = static_cast<int>(names.size());
  if (n < 2 || n > kNb101MaxOps + 2) {
    throw ValidationError("NB-101 cells have 2 to 7 nodes, got " +
                          std::to_string(n));
  }
  if (names.front() != "input" || names.back() != "output") {
    throw ValidationError("NB-101 ops must start with input and end with output");
  }
  if (static_cast<int>(rows.size()) != n) {
    throw ParseError("NB-101 adjacency needs " + std::to_string(n) + " rows");
  }
  CellGraph cell;
  cell.space = SearchSpace::kNb101;
  cell.arch_id = std::move(arch_id);
  for (int i = 1; i + 1 < n; ++i) {
    const auto it = std::find_if(
        kNb101Names.begin(), kNb101Names.end(),
        [&](const Nb101Name& entry) { return entry.name == names[i]; });
    if (it == kNb101Names.end()) {
      throw ValidationError("unknown NB-101 operation '" + std::string(names[i]) +
                            "'");
    }
    cell.ops.push_back(it->op);
  }
  cell.detached.assign(cell.ops.size(), false);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != n) {
      throw ParseError("malformed adjacency row '" + std::string(rows[r]) + "'");
    }
    for (int c = 0; c < n; ++c) {
      const char bit = rows[r][c];
      if (bit != '0' && bit != '1') {
        throw ParseError("malformed adjacency row '" + std::string(rows[r]) +
                         "'");
      }
      if (bit == '1') {
        if (c <= r) {
          throw ValidationError(
              "NB-101 adjacency must be strictly upper triangular");
        }
        cell.edges.emplace_back(r, c);
      }
    }
  }
  sort_edges(cell.edges);
  return cell;
}

std::string nb101_cell_string(const CellGraph& cell) {
  std::string out = "input";
  for (OpKind op : cell.ops) {
    const auto it =
        std::find_if(kNb101Names.begin(), kNb101Names.end(),
                     [&](const Nb101Name& entry) { return entry.op == op; });
    if (it == kNb101Names.end()) {
      throw ValidationError("not an NB-101 operation: " +
                            std::string(op_name(op)));
    }
    out += ',';
    out += it->name;
  }
  out += ",output;";
  const int n = cell.num_nodes();
  for (int r = 0; r < n; ++r) {
    if (r > 0) out += ',';
    for (int c = 0; c < n; ++c) out += cell.has_edge(r, c) ? '1' : '0';
  }
  return out;
}

CellGraph optimize_graph(const CellGraph& g) {
  CellGraph out = g;
  const int n = g.num_nodes();
  out.detached.resize(g.ops.size(), false);
  std::vector<std::set<int>> succ(n), pred(n);
  for (const auto& [src, dst] : g.edges) {
    succ[src].insert(dst);
    pred[dst].insert(src);
  }
  const auto isolate = [&](int node) {
    for (int s : succ[node]) pred[s].erase(node);
    for (int p : pred[node]) succ[p].erase(node);
    succ[node].clear();
    pred[node].clear();
  };

  for (int i = 0; i < g.num_ops(); ++i) {
    if (g.ops[i] == OpKind::kZero) {
      isolate(i + 1);
      out.detached[i] = true;
    }
  }
  // Node order is topological for both spaces, so chains of skips collapse
  // correctly when processed front to back.
  for (int i = 0; i < g.num_ops(); ++i) {
    if (g.ops[i] != OpKind::kSkip) continue;
    const int node = i + 1;
    for (int p : pred[node]) {
      for (int s : succ[node]) {
        succ[p].insert(s);
        pred[s].insert(p);
      }
    }
    isolate(node);
    out.detached[i] = true;
  }

  std::vector<bool> from_input(n, false), to_output(n, false);
  std::vector<int> stack = {g.input_node()};
  from_input[g.input_node()] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int s : succ[v]) {
      if (!from_input[s]) {
        from_input[s] = true;
        stack.push_back(s);
      }
    }
  }
  stack = {g.output_node()};
  to_output[g.output_node()] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : pred[v]) {
      if (!to_output[p]) {
        to_output[p] = true;
        stack.push_back(p);
      }
    }
  }

  out.edges.clear();
  for (int v = 0; v < n; ++v) {
    const bool on_path = from_input[v] && to_output[v];
    if (v >= 1 && v <= g.num_ops() && !on_path) out.detached[v - 1] = true;
    if (!on_path) continue;
    for (int s : succ[v]) {
      if (from_input[s] && to_output[s]) out.edges.emplace_back(v, s);
    }
  }
  sort_edges(out.edges);
  return out;
}

EncodedGraph encode(const CellGraph& g, const EncodeOptions& options) {
  const int n = g.space == SearchSpace::kNb201 ? kNb201EncodedNodes
                                               : kNb101EncodedNodes;
  const int max_ops = n - 3;
  if (g.num_ops() > max_ops) {
    throw DimensionError("cell has " + std::to_string(g.num_ops()) +
                         " operation nodes, encoding holds " +
                         std::to_string(max_ops));
  }
  const int output = n - 2;
  const int global = n - 1;
  const auto remap = [&](int node) {
    return node == g.output_node() ? output : node;
  };

  EncodedGraph enc;
  enc.adjacency = Eigen::MatrixXd::Zero(n, n);
  enc.features = Eigen::MatrixXd::Zero(n, kFeatureWidth);
  for (const auto& [src, dst] : g.edges) {
    enc.adjacency(remap(src), remap(dst)) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    enc.adjacency(i, i) = 1.0;
    enc.adjacency(global, i) = 1.0;
    enc.adjacency(i, global) = 1.0;
  }

  enc.features(0, feature_column(OpKind::kInput)) = 1.0;
  enc.features(output, feature_column(OpKind::kOutput)) = 1.0;
  enc.features(global, feature_column(OpKind::kGlobal)) = 1.0;
  for (int i = 0; i < g.num_ops(); ++i) {
    const bool detached = i < static_cast<int>(g.detached.size()) && g.detached[i];
    const int column = feature_column(g.ops[i]);
    if (!detached && column >= 0) enc.features(i + 1, column) = 1.0;
  }

  if (options.normalize_adjacency) {
    const Eigen::VectorXd row_sums = enc.adjacency.rowwise().sum();
    enc.adjacency = row_sums.cwiseInverse().asDiagonal() * enc.adjacency;
  }
  return enc;
}

EncodedGraph encode_cell(const CellGraph& g, const EncodeOptions& options) {
  return encode(optimize_graph(g), options);
}

std::vector<std::vector<int>> io_paths(const CellGraph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> succ(n);
  for (const auto& [src, dst] : g.edges) succ[src].push_back(dst);
  std::vector<std::vector<int>> paths;
  std::vector<int> current;
  const auto dfs = [&](auto&& self, int v) -> void {
    if (v == g.output_node()) {
      paths.push_back(current);
      return;
    }
    for (int s : succ[v]) {
      const bool is_op = s != g.output_node();
      if (is_op) current.push_back(s);
      self(self, s);
      if (is_op) current.pop_back();
    }
  };
  dfs(dfs, g.input_node());
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

decltype(enumerate_nb201()) enumerate_space(SearchSpace space) {
  if (space != SearchSpace::kNb201) {
    throw UnsupportedError(
        "NB-101 has no closed-form enumeration; pass an id list");
  }
  return enumerate_nb201();
}

std::vector<CellGraph> enumerate_space(
    SearchSpace space,
    std::span<const std::pair<std::string, std::string>> id_list) {
  std::vector<CellGraph> cells;
  cells.reserve(id_list.size());
  for (const auto& [id, spec] : id_list) {
    if (space == SearchSpace::kNb201) {
      cells.push_back(parse_arch_string(spec.empty() ? id : spec));
    } else {
      cells.push_back(parse_nb101_cell(spec, id));
    }
  }
  return cells;
}

}  // namespace hwnas
