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

#include <cmath>
#include <vector>

#include "hwnas/errors.hpp"
#include "hwnas/training.hpp"
#include "test_support.hpp"

namespace hwnas {
namespace {

std::vector<UnaryExample> distinct_examples(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<UnaryExample> out;
  std::vector<std::string> seen;
  std::uniform_real_distribution<double> target(1.0, 3.0);
  while (static_cast<int>(out.size()) < n) {
    const CellGraph c = testing::random_cell(rng);
    const EncodedGraph g = encode_cell(c);
    bool dup = false;
    for (const auto& e : out) dup = dup || (e.graph.adjacency == g.adjacency && e.graph.features == g.features);
    if (dup) continue;
    out.push_back({g, target(rng)});
  }
  return out;
}

TrainConfig memorize_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.lr0 = 0.003;
  c.schedule = ScheduleKind::kConstant;
  c.weight_decay = 0.0;
  c.dropout = 0.0;
  c.max_epochs = 1500;
  c.early_stop_patience = 1499;
  c.shape.hidden_width = 32;
  c.shape.num_layers = 3;
  c.rng_seed = 3;
  return c;
}

TEST(Training, MemorizesSmallDataset) {
  const auto data = distinct_examples(8, 1);
  const UnaryTrainResult r = train_unary(data, {}, memorize_config());
  EXPECT_LT(evaluate_unary_loss(r.model, data), 1e-4);
  EXPECT_EQ(r.report.train_loss.size(), static_cast<std::size_t>(r.report.epochs_run));
}

TEST(Training, SameSeedIsBitIdentical) {
  const auto data = distinct_examples(12, 2);
  TrainConfig c = latency_train_config(9);
  c.shape.hidden_width = 16;
  c.max_epochs = 6;
  c.early_stop_patience = 5;
  const UnaryTrainResult a = train_unary(data, {}, c);
  const UnaryTrainResult b = train_unary(data, {}, c);
  EXPECT_EQ(a.model.layers, b.model.layers);
  EXPECT_EQ(a.model.head.weight, b.model.head.weight);
  EXPECT_EQ(a.report.val_loss, b.report.val_loss);
  c.rng_seed = 10;
  const UnaryTrainResult d = train_unary(data, {}, c);
  EXPECT_NE(a.model.layers, d.model.layers);
}

TEST(Training, BestSnapshotIsReturned) {
  const auto data = distinct_examples(12, 4);
  TrainConfig c = latency_train_config(1);
  c.shape.hidden_width = 16;
  c.max_epochs = 20;
  c.early_stop_patience = 19;
  const UnaryTrainResult r = train_unary(data, data, c);
  ASSERT_GE(r.report.best_epoch, 0);
  double best = r.report.val_loss.front();
  for (double v : r.report.val_loss) best = std::min(best, v);
  EXPECT_DOUBLE_EQ(r.report.best_val_loss, best);
  EXPECT_NEAR(evaluate_unary_loss(r.model, data), best, 1e-9 * std::max(1.0, best));
  EXPECT_EQ(r.model.target, TargetTransform::kLog);
}

TEST(Training, RejectsEmptyDataAndBadConfig) {
  EXPECT_THROW(train_unary({}, {}, memorize_config()), UsageError);
  TrainConfig c = memorize_config();
  c.batch_size = 0;
  const auto data = distinct_examples(2, 5);
  EXPECT_THROW(train_unary(data, {}, c), ConfigError);
  c = memorize_config();
  c.early_stop_patience = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.early_stop_patience = c.max_epochs;
  EXPECT_NO_THROW(c.validate());
}

TEST(Training, LogTargetNeedsPositiveValues) {
  auto data = distinct_examples(3, 6);
  data[1].target = 0.0;
  EXPECT_THROW(train_unary(data, {}, latency_train_config()), ValidationError);
  EXPECT_DOUBLE_EQ(inverse_transform_target(TargetTransform::kLog,
                                            transform_target(TargetTransform::kLog, 7.5)),
                   7.5);
}

TEST(Training, AccuracyProtocolBatchTiers) {
  EXPECT_EQ(accuracy_train_config(100, false).batch_size, 50);
  EXPECT_EQ(accuracy_train_config(50, false).batch_size, 32);
  EXPECT_EQ(accuracy_train_config(25, false).batch_size, 16);
  EXPECT_EQ(accuracy_train_config(100, true).batch_size, 64);
  EXPECT_EQ(accuracy_train_config(25, true).batch_size, 32);
  EXPECT_EQ(accuracy_train_config(100, false).schedule, ScheduleKind::kCosine);
  EXPECT_EQ(latency_train_config().batch_size, 10);
  EXPECT_EQ(latency_train_config().schedule, ScheduleKind::kPlateau);
}

}  // namespace
}  // namespace hwnas
