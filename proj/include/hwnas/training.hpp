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

#ifndef HWNAS_TRAINING_HPP_
#define HWNAS_TRAINING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hwnas/gcn.hpp"
#include "hwnas/graph_encoding.hpp"
#include "hwnas/optim.hpp"
#include "hwnas/rng.hpp"

namespace hwnas {

struct TrainConfig {
  int batch_size = 10;
  double lr0 = 0.0008;
  ScheduleKind schedule = ScheduleKind::kPlateau;
  double plateau_factor = 0.5;
  int plateau_patience = 10;
  double weight_decay = 0.0005;
  double dropout = 0.002;
  int max_epochs = 250;
  int early_stop_patience = 35;
  std::uint64_t rng_seed = 0;
  GcnShape shape;
  TargetTransform target = TargetTransform::kIdentity;
  // Starts the head bias at the mean (transformed) training target so the
  // first epochs fit structure instead of the offset.
  bool init_head_bias_to_mean = true;

  // Throws ConfigError on out-of-range values.
  void validate() const;
  LrSchedule make_schedule() const;
};

// Latency predictor protocol: batch 10, plateau halving, log-space targets.
TrainConfig latency_train_config(std::uint64_t seed = 0);
// Accuracy predictor protocol: cosine annealing, batch size chosen by the
// number of training models (unary 50/32/16, binary 64/32/32 for
// 100/50/25 models; the nearest tier is used for other sizes).
TrainConfig accuracy_train_config(int num_models, bool binary,
                                  std::uint64_t seed = 0);

struct UnaryExample {
  EncodedGraph graph;
  double target = 0.0;  // raw units (ms or percent)
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = -1;  // 0-based
  double best_val_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

struct UnaryTrainResult {
  GcnModel model;
  TrainReport report;
};

// Mean squared error in the model's target space, inference mode.
double evaluate_unary_loss(const GcnModel& model,
                           std::span<const UnaryExample> examples);

// Trains a unary predictor with early stopping on `validation` (the training
// set is used when it is empty) and returns the best-validation snapshot.
// When `init` is given its weights seed the run, otherwise fresh weights are
// drawn from the config seed.
UnaryTrainResult train_unary(std::span<const UnaryExample> train,
                             std::span<const UnaryExample> validation,
                             const TrainConfig& config,
                             const GcnModel* init = nullptr);

// Copies the GCN layers of `src` into a model shaped like `dst` and draws a
// fresh head. The target transform of `dst` is kept.
GcnModel transfer_init(const GcnModel& dst, const GcnModel& src, Rng& rng);

double transform_target(TargetTransform t, double raw);
double inverse_transform_target(TargetTransform t, double value);

}  // namespace hwnas

#endif  // HWNAS_TRAINING_HPP_
