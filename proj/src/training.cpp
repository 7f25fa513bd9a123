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

#include "hwnas/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fp_env.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train: lr0 must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw ConfigError("train: dropout must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be >= 0");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  // A patience of max_epochs or more simply disables early stopping.
  if (early_stop_patience < 1) throw ConfigError("train: early_stop_patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0) || plateau_patience < 1)
    throw ConfigError("train: invalid plateau settings");
}

LrSchedule TrainConfig::make_schedule() const {
  switch (schedule) {
    case ScheduleKind::kPlateau:
      return LrSchedule::plateau(lr0, plateau_factor, plateau_patience);
    case ScheduleKind::kCosine:
      return LrSchedule::cosine(lr0, max_epochs);
    case ScheduleKind::kConstant:
      return LrSchedule::constant(lr0);
  }
  throw ConfigError("train: unknown schedule");
}

TrainConfig latency_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.batch_size = 10;
  c.lr0 = 0.0008;
  c.schedule = ScheduleKind::kPlateau;
  c.weight_decay = 0.0005;
  c.dropout = 0.002;
  c.target = TargetTransform::kLog;
  c.rng_seed = seed;
  return c;
}

TrainConfig accuracy_train_config(int num_models, bool binary, std::uint64_t seed) {
  TrainConfig c;
  c.lr0 = 0.00035;
  c.schedule = ScheduleKind::kCosine;
  c.weight_decay = 0.0005;
  c.dropout = 0.2;
  c.target = TargetTransform::kIdentity;
  c.rng_seed = seed;
  if (num_models >= 75)
    c.batch_size = binary ? 64 : 50;
  else if (num_models >= 38)
    c.batch_size = 32;
  else
    c.batch_size = binary ? 32 : 16;
  return c;
}

double transform_target(TargetTransform t, double raw) {
  if (t == TargetTransform::kIdentity) return raw;
  if (!(raw > 0.0)) throw ValidationError("log target requires a positive value");
  return std::log(raw);
}

double inverse_transform_target(TargetTransform t, double value) {
  return t == TargetTransform::kLog ? std::exp(value) : value;
}

namespace {

std::vector<double> transformed_targets(TargetTransform t,
                                        std::span<const UnaryExample> examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const UnaryExample& e : examples) {
    if (!std::isfinite(e.target)) throw ValidationError("train: non-finite target");
    out.push_back(transform_target(t, e.target));
  }
  return out;
}

double mse(const GcnModel& model, std::span<const UnaryExample> examples,
           std::span<const double> targets) {
  std::vector<const EncodedGraph*> graphs;
  graphs.reserve(examples.size());
  for (const UnaryExample& e : examples) graphs.push_back(&e.graph);
  const Eigen::VectorXd pred = unary_head(model, embed(model, graphs));
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = pred(static_cast<Eigen::Index>(i)) - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(targets.size());
}

}  // namespace

double evaluate_unary_loss(const GcnModel& model,
                           std::span<const UnaryExample> examples) {
  if (examples.empty()) throw UsageError("evaluate: empty dataset");
  const std::vector<double> t = transformed_targets(model.target, examples);
  return mse(model, examples, t);
}

UnaryTrainResult train_unary(std::span<const UnaryExample> train,
                             std::span<const UnaryExample> validation,
                             const TrainConfig& config, const GcnModel* init) {
  config.validate();
  if (train.empty()) throw UsageError("train_unary: empty dataset");
  const detail::ScopedFlushDenormals flush;
  if (validation.empty()) validation = train;

  const std::vector<double> train_t = transformed_targets(config.target, train);
  const std::vector<double> val_t = transformed_targets(config.target, validation);

  GcnModel model;
  if (init != nullptr) {
    model = *init;
  } else {
    Rng init_rng = make_rng(config.rng_seed, "init");
    model = make_gcn(config.shape, init_rng);
  }
  if (!model.has_head() || model.head.outputs() != 1)
    throw DimensionError("train_unary: model needs a one-output head");
  model.target = config.target;
  if (config.init_head_bias_to_mean)
    model.head.bias(0) = std::accumulate(train_t.begin(), train_t.end(), 0.0) /
                         static_cast<double>(train_t.size());

  Rng shuffle_rng = make_rng(config.rng_seed, "shuffle");
  Rng dropout_rng = make_rng(config.rng_seed, "dropout");
  AdamW opt({.weight_decay = config.weight_decay});
  LrSchedule schedule = config.make_schedule();

  UnaryTrainResult result;
  result.report.best_val_loss = std::numeric_limits<double>::infinity();
  result.model = model;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const EncodedGraph*> batch_graphs;
  std::vector<double> batch_targets;
  const ForwardOptions fwd{.train_mode = true, .dropout = config.dropout,
                           .rng = &dropout_rng};
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch_graphs.clear();
      batch_targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_graphs.push_back(&train[order[i]].graph);
        batch_targets.push_back(train_t[order[i]]);
      }
      GcnGradients grads;
      epoch_loss += unary_loss(model, batch_graphs, batch_targets, fwd, &grads);
      ++batches;
      opt.step(parameter_views(model), gradient_views(grads), schedule.lr());
      ++model.generation;
    }
    const double val_loss = mse(model, validation, val_t);
    if (!std::isfinite(val_loss))
      throw DegenerateError("train_unary: loss diverged at epoch " +
                            std::to_string(epoch));
    result.report.train_loss.push_back(epoch_loss / batches);
    result.report.val_loss.push_back(val_loss);
    result.report.epochs_run = epoch + 1;
    if (val_loss < result.report.best_val_loss) {
      result.report.best_val_loss = val_loss;
      result.report.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
    schedule.step(epoch + 1, val_loss);
  }
  return result;
}

GcnModel transfer_init(const GcnModel& dst, const GcnModel& src, Rng& rng) {
  if (dst.layers.size() != src.layers.size())
    throw DimensionError("transfer_init: layer counts differ");
  for (std::size_t l = 0; l < dst.layers.size(); ++l)
    if (dst.layers[l].rows() != src.layers[l].rows() ||
        dst.layers[l].cols() != src.layers[l].cols())
      throw DimensionError("transfer_init: layer " + std::to_string(l) +
                           " shapes differ");
  GcnModel out = dst;
  out.layers = src.layers;
  if (dst.has_head())
    out.head = make_linear(dst.head.inputs(), dst.head.outputs(), rng);
  ++out.generation;
  return out;
}

}  // namespace hwnas
