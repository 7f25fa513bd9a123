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
#include <numbers>
#include <span>
#include <vector>

#include "hwnas/errors.hpp"
#include "hwnas/optim.hpp"

namespace hwnas {
namespace {

struct Params {
  std::vector<double> w;
  std::vector<double> g;
  std::vector<std::span<double>> pv() { return {std::span<double>(w)}; }
  std::vector<std::span<const double>> gv() const { return {std::span<const double>(g)}; }
};

TEST(AdamW, ZeroGradientWithoutDecayIsNoOp) {
  Params p{{1.0, -2.0, 3.5}, {0.0, 0.0, 0.0}};
  AdamW opt;
  for (int i = 0; i < 10; ++i) opt.step(p.pv(), p.gv(), 0.1);
  EXPECT_EQ(p.w, (std::vector<double>{1.0, -2.0, 3.5}));
  EXPECT_EQ(opt.steps(), 10);
}

TEST(AdamW, DecayIsDecoupledFromGradient) {
  const double lr = 0.01;
  const double wd = 0.3;
  Params p{{1.0, -2.0}, {0.0, 0.0}};
  AdamW opt({.weight_decay = wd});
  opt.step(p.pv(), p.gv(), lr);
  EXPECT_DOUBLE_EQ(p.w[0], 1.0 * (1.0 - lr * wd));
  EXPECT_DOUBLE_EQ(p.w[1], -2.0 * (1.0 - lr * wd));
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps).
  Params p{{0.0, 0.0}, {4.0, -0.5}};
  AdamW opt;
  opt.step(p.pv(), p.gv(), 0.1);
  EXPECT_NEAR(p.w[0], -0.1, 1e-8);
  EXPECT_NEAR(p.w[1], 0.1, 1e-8);
}

TEST(AdamW, ConvergesOnQuadratic) {
  const std::vector<double> target = {3.0, -1.0, 0.25};
  Params p{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  AdamW opt;
  for (int it = 0; it < 5000; ++it) {
    for (std::size_t i = 0; i < 3; ++i) p.g[i] = 2.0 * (p.w[i] - target[i]);
    opt.step(p.pv(), p.gv(), it < 4000 ? 0.05 : 0.001);
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p.w[i], target[i], 1e-3);
}

TEST(AdamW, RejectsShapeChanges) {
  Params p{{1.0}, {1.0}};
  AdamW opt;
  opt.step(p.pv(), p.gv(), 0.1);
  Params q{{1.0, 2.0}, {1.0, 1.0}};
  EXPECT_THROW(opt.step(q.pv(), q.gv(), 0.1), DimensionError);
  EXPECT_THROW(AdamW({.beta1 = 1.0}), ConfigError);
}

TEST(LrSchedule, PlateauHalvesAfterPatience) {
  LrSchedule s = LrSchedule::plateau(0.8, 0.5, 10);
  double lr = 0.0;
  for (int epoch = 1; epoch <= 25; ++epoch) lr = s.step(epoch, 1.0);
  EXPECT_DOUBLE_EQ(lr, 0.2);
}

TEST(LrSchedule, PlateauResetsOnImprovement) {
  LrSchedule s = LrSchedule::plateau(1.0, 0.5, 3);
  double metric = 10.0;
  for (int epoch = 1; epoch <= 20; ++epoch) EXPECT_DOUBLE_EQ(s.step(epoch, metric -= 0.1), 1.0);
  EXPECT_DOUBLE_EQ(s.step(21, 100.0), 1.0);
  EXPECT_DOUBLE_EQ(s.step(22, 100.0), 1.0);
  EXPECT_DOUBLE_EQ(s.step(23, 100.0), 0.5);
}

TEST(LrSchedule, CosineFollowsClosedForm) {
  const int max_epochs = 40;
  LrSchedule s = LrSchedule::cosine(0.01, max_epochs);
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const double expected =
        0.01 * (1.0 + std::cos(std::numbers::pi * epoch / max_epochs)) / 2.0;
    EXPECT_NEAR(s.step(epoch, 0.0), expected, 1e-15);
  }
  EXPECT_NEAR(s.lr(), 0.0, 1e-15);
}

TEST(LrSchedule, ConstantAndParsing) {
  LrSchedule s = LrSchedule::constant(0.3);
  for (int epoch = 1; epoch < 5; ++epoch) EXPECT_EQ(s.step(epoch, 1.0 / epoch), 0.3);
  EXPECT_EQ(parse_schedule_kind("cosine"), ScheduleKind::kCosine);
  EXPECT_EQ(to_string(ScheduleKind::kPlateau), "plateau");
  EXPECT_THROW(parse_schedule_kind("step"), ConfigError);
  EXPECT_THROW(LrSchedule::plateau(0.1, 1.5, 3), ConfigError);
}

}  // namespace
}  // namespace hwnas
