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

#ifndef HWNAS_PREDICTORS_HPP_
#define HWNAS_PREDICTORS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hwnas/benchmark_store.hpp"
#include "hwnas/checkpoint.hpp"
#include "hwnas/gcn.hpp"
#include "hwnas/graph_encoding.hpp"
#include "hwnas/training.hpp"

namespace hwnas {

// ---------------------------------------------------------------- unary

// Head output mapped back to raw units (ms or percent).
double predict_unary(const GcnModel& model, const EncodedGraph& g);
Eigen::VectorXd predict_unary(const GcnModel& model,
                              std::span<const EncodedGraph* const> graphs);

// ---------------------------------------------------------------- binary

enum class BinaryHeadKind : std::uint8_t {
  kSoftmax,  // two logits, KL against softmax targets
  kSigmoid,  // one logit, binary cross-entropy against soft or hard labels
};

enum class PairLabels : std::uint8_t { kSoft, kHard };

// Shared GCN trunk applied to both inputs; the head reads the concatenated
// embeddings [e1; e2].
struct BinaryPredictor {
  GcnModel trunk;  // headless
  Linear head;     // (2 or 1) x (2 * embedding width)
  BinaryHeadKind kind = BinaryHeadKind::kSoftmax;

  int embedding_width() const { return trunk.embedding_width(); }
};

BinaryPredictor make_binary_predictor(const GcnShape& shape, BinaryHeadKind kind,
                                      Rng& rng);

// Copies the GCN layers of `src` (for example a latency predictor) into the
// trunk; the relation head is left untouched. Throws DimensionError when the
// layer shapes differ.
void transfer_trunk(BinaryPredictor& bp, const GcnModel& src);

// Raw head outputs W [e1; e2] + b.
Eigen::VectorXd binary_logits(const BinaryPredictor& bp, const EncodedGraph& g1,
                              const EncodedGraph& g2);
// (p1, p2), p1 being the probability that g1 is the better model.
std::array<double, 2> binary_forward(const BinaryPredictor& bp,
                                     const EncodedGraph& g1,
                                     const EncodedGraph& g2);

// Per-model projections that make the comparator O(1): the log-odds of
// "a better than b" equal first[a] + second[b] + offset.
struct RelationScores {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
  double offset = 0.0;

  double log_odds(std::size_t a, std::size_t b) const {
    return first(static_cast<Eigen::Index>(a)) +
           second(static_cast<Eigen::Index>(b)) + offset;
  }
  double p_first_better(std::size_t a, std::size_t b) const;
};

RelationScores relation_scores(const BinaryPredictor& bp,
                               const Eigen::MatrixXd& embeddings);

struct RatedModel {
  std::string arch_id;
  EncodedGraph graph;
  double accuracy = 0.0;  // percent
};

struct PairSample {
  int first = 0;   // index into PairDataset::models
  int second = 0;
  // Softmax of the rescaled accuracies; components sum to 1.
  std::array<double, 2> target{0.5, 0.5};
};

struct PairDataset {
  std::vector<RatedModel> models;
  std::vector<PairSample> pairs;
  double accuracy_scale = 100.0;
};

inline constexpr double kDefaultAccuracyScale = 100.0;

// All n(n-1) ordered pairs. Accuracies are divided by `accuracy_scale`
// before the softmax. Throws UsageError on fewer than 2 models or duplicate
// ids.
PairDataset build_pair_dataset(std::vector<RatedModel> models,
                               double accuracy_scale = kDefaultAccuracyScale);

// Probability target for the first model: the softmax component for the
// softmax head, the interpolated (a - b + 1) / 2 clamped to [0, 1] for soft
// sigmoid labels, or 1 / 0 (0.5 on exact ties) for hard labels.
double pair_target(const PairDataset& data, const PairSample& pair,
                   BinaryHeadKind kind, PairLabels labels);

struct BinaryGradients {
  std::vector<Eigen::MatrixXd> trunk;
  Linear head;
};

// Mean loss over `pairs` (KL for softmax heads, BCE for sigmoid heads).
// Each distinct model in the batch runs through the trunk once.
double binary_loss(const BinaryPredictor& bp, const PairDataset& data,
                   std::span<const PairSample> pairs, PairLabels labels,
                   const ForwardOptions& options, BinaryGradients* grads);

std::vector<std::span<double>> parameter_views(BinaryPredictor& bp);
std::vector<std::span<const double>> gradient_views(const BinaryGradients& grads);

enum class PairBatching : std::uint8_t {
  // Models are partitioned into random groups of m with m(m-1) >= batch
  // size; a step uses every ordered pair inside one group, and an epoch is
  // one partition. Unbiased for the all-pairs loss at a fraction of the
  // trunk passes.
  kModelGroups,
  // Classic shuffled mini-batches over all ordered pairs.
  kPairShuffle,
};

struct BinaryTrainOptions {
  PairBatching batching = PairBatching::kModelGroups;
  PairLabels labels = PairLabels::kSoft;  // sigmoid heads only
};

struct BinaryTrainResult {
  BinaryPredictor predictor;
  TrainReport report;
};

// Early-stops on `validation` when given, otherwise on the training loss.
// The predictor passed in is the starting point, so repeated calls continue
// from earlier weights.
BinaryTrainResult train_binary(const BinaryPredictor& bp, const PairDataset& train,
                               const TrainConfig& config,
                               const BinaryTrainOptions& options = {},
                               const PairDataset* validation = nullptr);

// Same loop with a sigmoid head; `bp` must have kind kSigmoid.
BinaryTrainResult train_binary_soft_sigmoid(const BinaryPredictor& bp,
                                            const PairDataset& train,
                                            const TrainConfig& config,
                                            PairLabels labels,
                                            const PairDataset* validation = nullptr);

// Fraction of pairs ordered the same way as their true accuracies (pairs
// with equal accuracy are skipped).
double pairwise_accuracy(const BinaryPredictor& bp, const PairDataset& data);

// ---------------------------------------------------------------- ranking

// Stable merge sort driven by before(a, b); ties keep input order. Reports
// how many times the comparator ran.
struct RankingResult {
  std::vector<std::size_t> order;
  std::int64_t comparisons = 0;
};

RankingResult sort_by_comparator(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& before);

// Sorts candidates best-first with "a before b iff p1(a, b) > 0.5".
RankingResult rank_candidates(const BinaryPredictor& bp,
                              const Eigen::MatrixXd& embeddings);
RankingResult rank_candidates(const BinaryPredictor& bp,
                              std::span<const EncodedGraph* const> candidates);

// ---------------------------------------------------------------- layer-wise

// Sequential cost model: scale * (sum of attached op costs) + overhead.
struct LayerwiseCostModel {
  std::map<OpKind, double> per_op_cost;
  double scale = 1.0;
  double overhead = 0.0;
};

// Per-op costs of a device profile, scale 1 and no overhead.
LayerwiseCostModel layerwise_from_profile(const DeviceProfile& profile);

// Reads "op_name,device,cost_ms" rows for one device.
LayerwiseCostModel load_op_costs(const std::filesystem::path& path,
                                 std::string_view device);
void save_op_costs(const std::filesystem::path& path,
                   const std::map<std::string, LayerwiseCostModel>& per_device);

// Sum of per-op costs of the attached ops of optimize_graph(cell).
double layerwise_raw_sum(const LayerwiseCostModel& model, const CellGraph& cell);

struct CalibrationPoint {
  CellGraph cell;
  double measured_ms = 0.0;
};

// Least-squares scale for measured - overhead against the raw sums:
// scale = sum(raw * (meas - overhead)) / sum(raw^2). Throws DegenerateError
// when every raw sum is zero.
LayerwiseCostModel layerwise_calibrate(const LayerwiseCostModel& model,
                                       std::span<const CalibrationPoint> train);

double layerwise_predict(const LayerwiseCostModel& model, const CellGraph& cell);

// FLOPS as an ordering score; throws LookupError for unknown ids.
double flops_proxy(const BenchmarkTable& table, std::string_view arch_id);

// ---------------------------------------------------------------- checkpoints

inline constexpr std::string_view kKindUnaryLatency = "unary_latency";
inline constexpr std::string_view kKindUnaryAccuracy = "unary_accuracy";
inline constexpr std::string_view kKindBinary = "binary";

void save_unary(const std::filesystem::path& path, const GcnModel& model,
                std::string_view kind, const std::string& metadata = "{}");
GcnModel load_unary(const std::filesystem::path& path, std::string* kind = nullptr);
void save_binary(const std::filesystem::path& path, const BinaryPredictor& bp,
                 const std::string& metadata = "{}");
BinaryPredictor load_binary(const std::filesystem::path& path);

}  // namespace hwnas

#endif  // HWNAS_PREDICTORS_HPP_
