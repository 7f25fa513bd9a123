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

#ifndef HWNAS_GCN_HPP_
#define HWNAS_GCN_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hwnas/graph_encoding.hpp"
#include "hwnas/rng.hpp"

namespace hwnas {

inline constexpr int kDefaultHiddenWidth = 600;
inline constexpr int kDefaultGcnLayers = 4;

// Fully connected layer y = W x + b with W stored outputs x inputs.
struct Linear {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  int inputs() const { return static_cast<int>(weight.cols()); }
  int outputs() const { return static_cast<int>(weight.rows()); }
};

// Space in which a unary model is trained. Latency models regress the log
// of milliseconds and exponentiate at inference.
enum class TargetTransform : std::uint8_t { kIdentity, kLog };

// Stack of GCN layers H^{l+1} = relu(A H^l W^l) plus an optional unary head
// reading the global node's final row. Binary predictors keep their head
// outside and leave `head` empty.
struct GcnModel {
  std::vector<Eigen::MatrixXd> layers;  // W^l, input width x output width
  Linear head;
  TargetTransform target = TargetTransform::kIdentity;
  // Incremented by every in-place weight update; tapes from older
  // generations are rejected by backward().
  std::uint64_t generation = 0;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int input_width() const { return static_cast<int>(layers.front().rows()); }
  int embedding_width() const { return static_cast<int>(layers.back().cols()); }
  bool has_head() const { return head.weight.size() > 0; }
};

struct GcnShape {
  int input_width = kFeatureWidth;
  int hidden_width = kDefaultHiddenWidth;
  int num_layers = kDefaultGcnLayers;
  int head_outputs = 1;  // 0 for a headless trunk
};

// Weights uniform in +-1/sqrt(fan_in); biases zero.
Linear make_linear(int inputs, int outputs, Rng& rng);
GcnModel make_gcn(const GcnShape& shape, Rng& rng);

struct ForwardOptions {
  bool train_mode = false;
  double dropout = 0.0;  // applied after every hidden activation in train mode
  Rng* rng = nullptr;    // required when train_mode && dropout > 0
};

// Activations cached by a forward pass. A tape backs exactly one backward()
// call on the same, unmodified model.
class ForwardTape {
 public:
  ForwardTape() = default;
  ForwardTape(ForwardTape&&) noexcept = default;
  ForwardTape& operator=(ForwardTape&&) noexcept = default;
  ForwardTape(const ForwardTape&) = delete;
  ForwardTape& operator=(const ForwardTape&) = delete;

  int batch_size() const { return batch_; }
  bool consumed() const { return consumed_; }

 private:
  friend struct GcnKernels;

  const GcnModel* model_ = nullptr;
  std::uint64_t generation_ = 0;
  bool consumed_ = true;
  int batch_ = 0;
  int nodes_ = 0;
  std::vector<Eigen::MatrixXd> adjacency_;
  // Per full layer: aggregated input A H^l (stacked over the batch) and the
  // factor mapping dH^{l+1} to dZ^l (relu gate times dropout scale).
  std::vector<Eigen::MatrixXd> aggregated_;
  std::vector<Eigen::MatrixXd> gate_;
  // Last layer only evaluates the global node's row.
  Eigen::MatrixXd global_aggregated_;
  Eigen::MatrixXd global_gate_;
};

struct BatchForward {
  Eigen::MatrixXd embeddings;  // batch x embedding width
  ForwardTape tape;
};

// Graph embeddings (global node row of H^L) for a batch of graphs that share
// the same node count.
BatchForward forward_batch(const GcnModel& model,
                           std::span<const EncodedGraph* const> graphs,
                           const ForwardOptions& options = {});

std::pair<Eigen::VectorXd, ForwardTape> forward(const GcnModel& model,
                                                const EncodedGraph& g,
                                                const ForwardOptions& options = {});

// Inference-only embeddings, processed in chunks.
Eigen::MatrixXd embed(const GcnModel& model,
                      std::span<const EncodedGraph* const> graphs);

// Full H^L for one graph (every node's row), inference mode.
Eigen::MatrixXd node_embeddings(const GcnModel& model, const EncodedGraph& g);

// Reverse-mode pass: d loss / d W^l for every GCN layer given
// d loss / d embeddings (batch x width). Consumes the tape.
std::vector<Eigen::MatrixXd> backward(const GcnModel& model, ForwardTape& tape,
                                      const Eigen::MatrixXd& d_embeddings);

struct GcnGradients {
  std::vector<Eigen::MatrixXd> layers;
  Linear head;
};

// Raw head outputs (in the model's target space) for a batch of embeddings.
Eigen::VectorXd unary_head(const GcnModel& model,
                           const Eigen::MatrixXd& embeddings);

// Mean squared error over the batch in target space. Fills `grads` when
// non-null.
double unary_loss(const GcnModel& model,
                  std::span<const EncodedGraph* const> graphs,
                  std::span<const double> targets, const ForwardOptions& options,
                  GcnGradients* grads);

// Parameter views in a fixed order (layers, head weight, head bias) for the
// optimizer and for finite-difference checks.
std::vector<std::span<double>> parameter_views(GcnModel& model);
std::vector<std::span<const double>> gradient_views(const GcnGradients& grads);

}  // namespace hwnas

#endif  // HWNAS_GCN_HPP_
