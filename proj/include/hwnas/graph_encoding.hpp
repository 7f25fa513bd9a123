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

#ifndef HWNAS_GRAPH_ENCODING_HPP_
#define HWNAS_GRAPH_ENCODING_HPP_

#include <cstdint>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hwnas {

enum class SearchSpace : std::uint8_t { kNb201, kNb101 };

std::string_view to_string(SearchSpace space);
SearchSpace parse_search_space(std::string_view name);

// Node labels. Zero/Skip/AvgPool3x3 only occur in NB-201 cells and
// MaxPool3x3 only in NB-101 cells; Input/Output/Global are structural.
enum class OpKind : std::uint8_t {
  kZero,
  kSkip,
  kConv1x1,
  kConv3x3,
  kAvgPool3x3,
  kMaxPool3x3,
  kInput,
  kOutput,
  kGlobal,
};

std::string_view op_name(OpKind op);
bool is_searchable(OpKind op, SearchSpace space);

// The five NB-201 edge labels in the upstream benchmark's order.
inline constexpr OpKind kNb201Ops[] = {OpKind::kZero, OpKind::kSkip,
                                       OpKind::kConv1x1, OpKind::kConv3x3,
                                       OpKind::kAvgPool3x3};
inline constexpr int kNb201OpSlots = 6;
inline constexpr int kNb201SpaceSize = 15625;  // 5^6
inline constexpr int kNb101MaxOps = 5;

// Edge in a node-labeled cell. Node 0 is the input, nodes 1..ops.size() are
// the operation nodes and ops.size() + 1 is the output.
using CellEdge = std::pair<int, int>;

struct CellGraph {
  SearchSpace space = SearchSpace::kNb201;
  std::vector<OpKind> ops;
  // Sorted and free of duplicates.
  std::vector<CellEdge> edges;
  // One flag per operation node; set by optimize_graph for nodes that were
  // removed from the data flow but kept as typeless placeholders.
  std::vector<bool> detached;
  std::string arch_id;

  int num_ops() const { return static_cast<int>(ops.size()); }
  int input_node() const { return 0; }
  int output_node() const { return num_ops() + 1; }
  int num_nodes() const { return num_ops() + 2; }
  bool is_attached(int op_index) const { return !detached[op_index]; }
  bool has_edge(int src, int dst) const;

  friend bool operator==(const CellGraph&, const CellGraph&) = default;
};

// GCN input: adjacency A (row = source, column = destination) and one-hot
// features X over {Conv1x1, Conv3x3, Pool, Input, Output, Global}.
struct EncodedGraph {
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd features;

  int n() const { return static_cast<int>(adjacency.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
  int global_node() const { return n() - 1; }
};

inline constexpr int kFeatureWidth = 6;
inline constexpr int kNb201EncodedNodes = 9;
inline constexpr int kNb101EncodedNodes = 8;

struct EncodeOptions {
  // Row-normalizes A. Predictors train better on the raw matrix, so this is
  // off unless explicitly requested.
  bool normalize_adjacency = false;
};

// Parses "|O1~0|+|O2~0|O3~1|+|O4~0|O5~1|O6~2|". Throws ParseError for
// grammar violations and ValidationError for unknown operation names.
CellGraph parse_arch_string(std::string_view s);

// Canonical NB-201 architecture string for six edge labels.
std::string nb201_arch_string(std::span<const OpKind> ops);

// Builds the node-labeled NB-201 cell for the six labels O1..O6.
CellGraph make_nb201_cell(std::span<const OpKind> ops);

// Mixed-radix position of a cell in the enumeration order (O1 most
// significant digit, digits follow kNb201Ops).
int nb201_index(const CellGraph& cell);
CellGraph nb201_cell_from_index(int index);

// NB-101 cells are written as "<ops>;<adjacency rows>", e.g.
// "input,conv3x3-bn-relu,maxpool3x3,output;0110,0001,0001,0000". The ops
// list includes input and output; the adjacency must be upper triangular.
CellGraph parse_nb101_cell(std::string_view spec, std::string arch_id);
std::string nb101_cell_string(const CellGraph& cell);

// Detaches Zero nodes, bypasses then detaches Skip nodes, and detaches every
// node that no longer lies on an input->output path.
CellGraph optimize_graph(const CellGraph& g);

EncodedGraph encode(const CellGraph& g, const EncodeOptions& options = {});

// encode(optimize_graph(g)).
EncodedGraph encode_cell(const CellGraph& g, const EncodeOptions& options = {});

// All input->output paths as sequences of the operation-node indices
// (1-based node numbering) they traverse.
std::vector<std::vector<int>> io_paths(const CellGraph& g);

// Lazily yields all 15,625 NB-201 cells in nb201_index order.
inline auto enumerate_nb201() {
  return std::views::iota(0, kNb201SpaceSize) |
         std::views::transform(&nb201_cell_from_index);
}

// NB-201 is enumerated from its closed form. NB-101 has no closed-form
// enumeration and throws UnsupportedError; use the overload below.
decltype(enumerate_nb201()) enumerate_space(SearchSpace space);

// Materializes an externally supplied NB-101 id list given as
// (arch_id, cell spec) pairs.
std::vector<CellGraph> enumerate_space(
    SearchSpace space,
    std::span<const std::pair<std::string, std::string>> id_list);

}  // namespace hwnas

#endif  // HWNAS_GRAPH_ENCODING_HPP_
