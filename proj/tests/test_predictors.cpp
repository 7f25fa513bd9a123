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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <vector>

#include "hwnas/benchmark_store.hpp"
#include "hwnas/errors.hpp"
#include "hwnas/predictors.hpp"
#include "test_support.hpp"

namespace hwnas {
namespace {

std::vector<RatedModel> rated_models(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> acc(60.0, 95.0);
  std::vector<RatedModel> out;
  for (int i = 0; i < n; ++i) {
    const CellGraph c = testing::random_cell(rng);
    out.push_back({std::to_string(i) + ":" + c.arch_id, encode_cell(c), acc(rng)});
  }
  return out;
}

// Loss of one pair recomputed from the two logits with plain formulas.
double oracle_pair_loss(const BinaryPredictor& bp, const RatedModel& a, const RatedModel& b,
                        double scale, PairLabels labels) {
  const Eigen::VectorXd z = binary_logits(bp, a.graph, b.graph);
  if (bp.kind == BinaryHeadKind::kSoftmax) {
    const double ea = std::exp(a.accuracy / scale);
    const double eb = std::exp(b.accuracy / scale);
    const double t[2] = {ea / (ea + eb), eb / (ea + eb)};
    const double zmax = std::max(z(0), z(1));
    const double norm = std::exp(z(0) - zmax) + std::exp(z(1) - zmax);
    const double p[2] = {std::exp(z(0) - zmax) / norm, std::exp(z(1) - zmax) / norm};
    return t[0] * std::log(t[0] / p[0]) + t[1] * std::log(t[1] / p[1]);
  }
  double t = 0.0;
  const double d = (a.accuracy - b.accuracy) / scale;
  if (labels == PairLabels::kHard)
    t = d > 0 ? 1.0 : (d < 0 ? 0.0 : 0.5);
  else
    t = std::clamp((d + 1.0) / 2.0, 0.0, 1.0);
  const double p = 1.0 / (1.0 + std::exp(-z(0)));
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}

void check_binary_gradients(BinaryHeadKind kind, PairLabels labels, std::uint64_t seed) {
  Rng rng(seed);
  BinaryPredictor bp = make_binary_predictor(testing::small_shape(0), kind, rng);
  const PairDataset data = build_pair_dataset(rated_models(4, seed + 100));
  std::vector<PairSample> pairs(data.pairs.begin(), data.pairs.begin() + 7);

  BinaryGradients grads;
  const double loss = binary_loss(bp, data, pairs, labels, {}, &grads);
  double oracle = 0.0;
  for (const PairSample& p : pairs)
    oracle += oracle_pair_loss(bp, data.models[p.first], data.models[p.second],
                               data.accuracy_scale, labels);
  EXPECT_NEAR(loss, oracle / pairs.size(), 1e-12);

  auto params = parameter_views(bp);
  const auto gviews = gradient_views(grads);
  ASSERT_EQ(params.size(), gviews.size());
  const double h = 1e-6;  // small enough to stay clear of relu kinks
  for (std::size_t t = 0; t < params.size(); ++t)
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + h;
      const double up = binary_loss(bp, data, pairs, labels, {}, nullptr);
      params[t][i] = saved - h;
      const double down = binary_loss(bp, data, pairs, labels, {}, nullptr);
      params[t][i] = saved;
      const double numeric = (up - down) / (2 * h);
      EXPECT_LE(std::abs(numeric - gviews[t][i]),
                1e-6 + 1e-4 * std::max(std::abs(numeric), std::abs(gviews[t][i])))
          << "tensor " << t << " index " << i;
    }
}

TEST(BinaryPredictor, SoftmaxKlGradients) {
  for (std::uint64_t s = 0; s < 3; ++s) check_binary_gradients(BinaryHeadKind::kSoftmax, PairLabels::kSoft, s);
}

TEST(BinaryPredictor, SigmoidBceGradients) {
  check_binary_gradients(BinaryHeadKind::kSigmoid, PairLabels::kSoft, 4);
  check_binary_gradients(BinaryHeadKind::kSigmoid, PairLabels::kHard, 5);
}

TEST(BinaryPredictor, LogitsMatchDenseComputation) {
  Rng rng(1);
  const BinaryPredictor bp =
      make_binary_predictor(testing::small_shape(0), BinaryHeadKind::kSoftmax, rng);
  const EncodedGraph a = testing::random_encoded(rng);
  const EncodedGraph b = testing::random_encoded(rng);
  Eigen::VectorXd concat(2 * bp.embedding_width());
  concat << forward(bp.trunk, a).first, forward(bp.trunk, b).first;
  const Eigen::VectorXd expected = bp.head.weight * concat + bp.head.bias;
  EXPECT_TRUE(binary_logits(bp, a, b).isApprox(expected, 1e-12));
  const auto p = binary_forward(bp, a, b);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_NEAR(p[0], std::exp(expected(0)) / (std::exp(expected(0)) + std::exp(expected(1))),
              1e-12);
}

TEST(BinaryPredictor, ZeroHeadIsIndifferent) {
  Rng rng(2);
  for (BinaryHeadKind kind : {BinaryHeadKind::kSoftmax, BinaryHeadKind::kSigmoid}) {
    BinaryPredictor bp = make_binary_predictor(testing::small_shape(0), kind, rng);
    bp.head.weight.setZero();
    bp.head.bias.setZero();
    const auto p = binary_forward(bp, testing::random_encoded(rng), testing::random_encoded(rng));
    EXPECT_EQ(p[0], 0.5);
    EXPECT_EQ(p[1], 0.5);
  }
}

TEST(BinaryPredictor, RelationScoresMatchForward) {
  Rng rng(3);
  for (BinaryHeadKind kind : {BinaryHeadKind::kSoftmax, BinaryHeadKind::kSigmoid}) {
    const BinaryPredictor bp = make_binary_predictor(testing::small_shape(0), kind, rng);
    std::vector<EncodedGraph> graphs;
    for (int i = 0; i < 10; ++i) graphs.push_back(testing::random_encoded(rng));
    std::vector<const EncodedGraph*> ptrs;
    for (const auto& g : graphs) ptrs.push_back(&g);
    const RelationScores s = relation_scores(bp, embed(bp.trunk, ptrs));
    for (std::size_t a = 0; a < 10; ++a)
      for (std::size_t b = 0; b < 10; ++b)
        EXPECT_NEAR(s.p_first_better(a, b), binary_forward(bp, graphs[a], graphs[b])[0], 1e-12);
  }
}

TEST(PairDataset, AllOrderedPairsAndTargets) {
  const PairDataset data = build_pair_dataset(rated_models(6, 1));
  EXPECT_EQ(data.pairs.size(), 30u);
  std::set<std::pair<int, int>> seen;
  for (const PairSample& p : data.pairs) {
    EXPECT_NE(p.first, p.second);
    seen.insert({p.first, p.second});
    EXPECT_NEAR(p.target[0] + p.target[1], 1.0, 1e-15);
  }
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_THROW(build_pair_dataset(rated_models(1, 1)), UsageError);
  auto dup = rated_models(3, 2);
  dup[2].arch_id = dup[0].arch_id;
  EXPECT_THROW(build_pair_dataset(dup), UsageError);
}

TEST(PairDataset, TargetsAreShiftInvariant) {
  auto models = rated_models(5, 3);
  const PairDataset base = build_pair_dataset(models);
  for (auto& m : models) m.accuracy += 4.0;
  const PairDataset shifted = build_pair_dataset(models);
  for (std::size_t i = 0; i < base.pairs.size(); ++i)
    EXPECT_NEAR(base.pairs[i].target[0], shifted.pairs[i].target[0], 1e-12);
}

TEST(PairDataset, RescaledSoftmaxIsNotSaturated) {
  std::vector<RatedModel> models = rated_models(2, 4);
  models[0].accuracy = 90.0;
  models[1].accuracy = 91.0;
  const PairDataset data = build_pair_dataset(models);
  EXPECT_NEAR(data.pairs[0].target[0], 0.4975, 1e-4);
}

TEST(PairDataset, SigmoidLabels) {
  std::vector<RatedModel> models = rated_models(3, 5);
  models[0].accuracy = 90.0;
  models[1].accuracy = 80.0;
  models[2].accuracy = 80.0;
  const PairDataset data = build_pair_dataset(models);
  const auto find = [&](int a, int b) {
    for (const auto& p : data.pairs)
      if (p.first == a && p.second == b) return p;
    throw std::logic_error("pair missing");
  };
  EXPECT_NEAR(pair_target(data, find(0, 1), BinaryHeadKind::kSigmoid, PairLabels::kSoft), 0.55, 1e-12);
  EXPECT_NEAR(pair_target(data, find(1, 0), BinaryHeadKind::kSigmoid, PairLabels::kSoft), 0.45, 1e-12);
  EXPECT_EQ(pair_target(data, find(0, 1), BinaryHeadKind::kSigmoid, PairLabels::kHard), 1.0);
  EXPECT_EQ(pair_target(data, find(1, 0), BinaryHeadKind::kSigmoid, PairLabels::kHard), 0.0);
  EXPECT_EQ(pair_target(data, find(1, 2), BinaryHeadKind::kSigmoid, PairLabels::kHard), 0.5);
}

TEST(BinaryTraining, LearnsOrderingOfSmallSet) {
  Rng rng(6);
  const BinaryPredictor bp =
      make_binary_predictor(testing::small_shape(0), BinaryHeadKind::kSoftmax, rng);
  auto models = rated_models(12, 7);
  const PairDataset data = build_pair_dataset(models, 10.0);
  TrainConfig c = accuracy_train_config(12, true, 3);
  c.shape = testing::small_shape(0);
  c.max_epochs = 300;
  c.early_stop_patience = 299;
  c.lr0 = 0.01;
  c.dropout = 0.0;
  const BinaryTrainResult r = train_binary(bp, data, c);
  EXPECT_GT(pairwise_accuracy(r.predictor, data), 0.85);
  const BinaryTrainResult again = train_binary(bp, data, c);
  EXPECT_EQ(again.predictor.trunk.layers, r.predictor.trunk.layers);
}

TEST(Ranking, MergeSortMatchesStableSort) {
  Rng rng(8);
  std::uniform_int_distribution<int> key(0, 20);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> keys(200 + trial);
    for (int& k : keys) k = key(rng);
    const auto before = [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; };
    const RankingResult r = sort_by_comparator(keys.size(), before);
    std::vector<std::size_t> expected(keys.size());
    std::iota(expected.begin(), expected.end(), 0);
    std::stable_sort(expected.begin(), expected.end(), before);
    EXPECT_EQ(r.order, expected);
  }
  EXPECT_TRUE(sort_by_comparator(0, [](std::size_t, std::size_t) { return false; }).order.empty());
}

TEST(Ranking, ComparatorCallsStayLoglinear) {
  const std::size_t n = 15625;
  Rng rng(9);
  std::vector<double> keys(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& k : keys) k = u(rng);
  const RankingResult r =
      sort_by_comparator(n, [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  EXPECT_LT(static_cast<double>(r.comparisons), 2.0 * n * std::log2(static_cast<double>(n)));
  for (std::size_t i = 1; i < n; ++i) ASSERT_GE(keys[r.order[i - 1]], keys[r.order[i]]);
}

TEST(Ranking, RankCandidatesIsAPermutation) {
  Rng rng(10);
  const BinaryPredictor bp =
      make_binary_predictor(testing::small_shape(0), BinaryHeadKind::kSoftmax, rng);
  std::vector<EncodedGraph> graphs;
  for (int i = 0; i < 50; ++i) graphs.push_back(testing::random_encoded(rng));
  std::vector<const EncodedGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  RankingResult r = rank_candidates(bp, ptrs);
  std::sort(r.order.begin(), r.order.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(r.order[i], i);
}

LayerwiseCostModel unit_costs() {
  LayerwiseCostModel m;
  m.per_op_cost = {{OpKind::kConv1x1, 0.25}, {OpKind::kConv3x3, 1.0}, {OpKind::kAvgPool3x3, 0.5}};
  return m;
}

TEST(Layerwise, CalibrationClosedForms) {
  const LayerwiseCostModel base = unit_costs();
  Rng rng(11);
  std::vector<CalibrationPoint> exact;
  for (int i = 0; i < 30; ++i) {
    const CellGraph c = testing::random_cell(rng);
    exact.push_back({c, 2.0 * layerwise_raw_sum(base, c)});
  }
  const LayerwiseCostModel fit = layerwise_calibrate(base, exact);
  EXPECT_NEAR(fit.scale, 2.0, 1e-12);
  for (const auto& p : exact) EXPECT_NEAR(layerwise_predict(fit, p.cell), p.measured_ms, 1e-12);

  // Raw sum 4: four attached 3x3 convolutions.
  const CellGraph four = parse_arch_string(
      "|nor_conv_3x3~0|+|none~0|nor_conv_3x3~1|+|nor_conv_3x3~0|none~1|nor_conv_3x3~2|");
  ASSERT_EQ(layerwise_raw_sum(base, four), 4.0);
  const CalibrationPoint one[] = {{four, 10.0}};
  EXPECT_NEAR(layerwise_calibrate(base, one).scale, 2.5, 1e-15);

  const CalibrationPoint zero[] = {{nb201_cell_from_index(0), 3.0}};
  EXPECT_THROW(layerwise_calibrate(base, zero), DegenerateError);
}

TEST(Layerwise, PredictionExamples) {
  LayerwiseCostModel m = unit_costs();
  m.overhead = 0.7;
  EXPECT_EQ(layerwise_predict(m, nb201_cell_from_index(0)), 0.7);
  m.overhead = 0.0;
  m.scale = 2.0;
  const CellGraph one_conv =
      parse_arch_string("|none~0|+|none~0|none~1|+|nor_conv_3x3~0|none~1|none~2|");
  EXPECT_EQ(layerwise_predict(m, one_conv), 2.0);
}

TEST(Layerwise, MatchesSummationOracleOverSpace) {
  LayerwiseCostModel m = unit_costs();
  m.scale = 1.7;
  m.overhead = 0.3;
  // Independent rule: an edge op counts iff some input->output path through
  // it has no zero edge.
  constexpr std::pair<int, int> edges[] = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};
  for (int idx = 0; idx < kNb201SpaceSize; ++idx) {
    const CellGraph c = nb201_cell_from_index(idx);
    bool reach_from_in[4] = {true, false, false, false};
    for (int v = 1; v < 4; ++v)
      for (int k = 0; k < 6; ++k)
        if (edges[k].second == v && c.ops[k] != OpKind::kZero && reach_from_in[edges[k].first])
          reach_from_in[v] = true;
    bool reach_out[4] = {false, false, false, true};
    for (int v = 2; v >= 0; --v)
      for (int k = 0; k < 6; ++k)
        if (edges[k].first == v && c.ops[k] != OpKind::kZero && reach_out[edges[k].second])
          reach_out[v] = true;
    double sum = 0.0;
    for (int k = 0; k < 6; ++k) {
      const OpKind op = c.ops[k];
      if (op == OpKind::kZero || op == OpKind::kSkip) continue;
      if (reach_from_in[edges[k].first] && reach_out[edges[k].second])
        sum += m.per_op_cost.at(op);
    }
    ASSERT_NEAR(layerwise_predict(m, c), 1.7 * sum + 0.3, 1e-12) << c.arch_id;
  }
}

TEST(Layerwise, OpCostFileRoundTrip) {
  testing::TempDir dir("lw");
  save_op_costs(dir / "ops.csv", {{"cpu", unit_costs()}});
  const LayerwiseCostModel back = load_op_costs(dir / "ops.csv", "cpu");
  EXPECT_EQ(back.per_op_cost, unit_costs().per_op_cost);
  EXPECT_THROW(load_op_costs(dir / "ops.csv", "gpu"), LookupError);
}

TEST(Proxies, FlopsLookup) {
  BenchmarkTable t(SearchSpace::kNb201, {"cpu"});
  BenchmarkEntry e;
  e.arch_id = nb201_cell_from_index(5).arch_id;
  e.val_accuracy = {50.0};
  e.test_accuracy = {50.0};
  e.latency_ms = {{"cpu", 1.0}};
  e.flops = 42.0;
  t.insert(e);
  EXPECT_EQ(flops_proxy(t, e.arch_id), 42.0);
  EXPECT_THROW(flops_proxy(t, "nope"), LookupError);
}

TEST(Checkpoints, BinaryRoundTrip) {
  testing::TempDir dir("bin");
  Rng rng(12);
  const BinaryPredictor bp =
      make_binary_predictor(testing::small_shape(0), BinaryHeadKind::kSigmoid, rng);
  save_binary(dir / "b.ckpt", bp);
  const BinaryPredictor back = load_binary(dir / "b.ckpt");
  EXPECT_EQ(back.kind, bp.kind);
  EXPECT_EQ(back.trunk.layers, bp.trunk.layers);
  EXPECT_EQ(back.head.weight, bp.head.weight);
  EXPECT_EQ(back.head.bias, bp.head.bias);
  EXPECT_THROW(load_unary(dir / "b.ckpt"), ValidationError);
}

TEST(Checkpoints, TransferTrunkCopiesLayers) {
  Rng rng(13);
  BinaryPredictor bp = make_binary_predictor(testing::small_shape(0), BinaryHeadKind::kSoftmax, rng);
  const GcnModel latency = make_gcn(testing::small_shape(), rng);
  const Linear head = bp.head;
  transfer_trunk(bp, latency);
  EXPECT_EQ(bp.trunk.layers, latency.layers);
  EXPECT_EQ(bp.head.weight, head.weight);
  GcnShape wide = testing::small_shape();
  wide.hidden_width = 9;
  EXPECT_THROW(transfer_trunk(bp, make_gcn(wide, rng)), DimensionError);
}

}  // namespace
}  // namespace hwnas
