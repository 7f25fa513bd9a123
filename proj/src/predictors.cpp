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

#include "hwnas/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "fp_env.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

std::array<double, 2> softmax_pair(double a1, double a2, double scale) {
  const double d = (a1 - a2) / scale;
  const double p1 = sigmoid(d);
  return {p1, 1.0 - p1};
}

void check_head(const BinaryPredictor& bp) {
  const int rows = bp.kind == BinaryHeadKind::kSoftmax ? 2 : 1;
  if (bp.head.outputs() != rows || bp.head.inputs() != 2 * bp.embedding_width())
    throw DimensionError("binary predictor: head shape does not match its kind");
}

// Log-odds of "first better" from head outputs.
double log_odds_from_logits(BinaryHeadKind kind, const Eigen::VectorXd& logits) {
  return kind == BinaryHeadKind::kSoftmax ? logits(0) - logits(1) : logits(0);
}

}  // namespace

// ---------------------------------------------------------------- unary

double predict_unary(const GcnModel& model, const EncodedGraph& g) {
  const EncodedGraph* one[] = {&g};
  return predict_unary(model, one)(0);
}

Eigen::VectorXd predict_unary(const GcnModel& model,
                              std::span<const EncodedGraph* const> graphs) {
  Eigen::VectorXd out = unary_head(model, embed(model, graphs));
  if (model.target == TargetTransform::kLog) out = out.array().exp().matrix();
  return out;
}

// ---------------------------------------------------------------- binary

BinaryPredictor make_binary_predictor(const GcnShape& shape, BinaryHeadKind kind,
                                      Rng& rng) {
  GcnShape trunk_shape = shape;
  trunk_shape.head_outputs = 0;
  BinaryPredictor bp;
  bp.trunk = make_gcn(trunk_shape, rng);
  bp.kind = kind;
  bp.head = make_linear(2 * shape.hidden_width,
                        kind == BinaryHeadKind::kSoftmax ? 2 : 1, rng);
  return bp;
}

void transfer_trunk(BinaryPredictor& bp, const GcnModel& src) {
  if (src.layers.size() != bp.trunk.layers.size())
    throw DimensionError("transfer: source has a different depth");
  for (std::size_t l = 0; l < src.layers.size(); ++l)
    if (src.layers[l].rows() != bp.trunk.layers[l].rows() ||
        src.layers[l].cols() != bp.trunk.layers[l].cols())
      throw DimensionError("transfer: source layer shapes differ");
  bp.trunk.layers = src.layers;
  ++bp.trunk.generation;
}

Eigen::VectorXd binary_logits(const BinaryPredictor& bp, const EncodedGraph& g1,
                              const EncodedGraph& g2) {
  check_head(bp);
  const EncodedGraph* both[] = {&g1, &g2};
  const Eigen::MatrixXd e = embed(bp.trunk, both);
  const int w = bp.embedding_width();
  return bp.head.weight.leftCols(w) * e.row(0).transpose() +
         bp.head.weight.rightCols(w) * e.row(1).transpose() + bp.head.bias;
}

std::array<double, 2> binary_forward(const BinaryPredictor& bp,
                                     const EncodedGraph& g1,
                                     const EncodedGraph& g2) {
  const double d = log_odds_from_logits(bp.kind, binary_logits(bp, g1, g2));
  const double p1 = sigmoid(d);
  return {p1, 1.0 - p1};
}

double RelationScores::p_first_better(std::size_t a, std::size_t b) const {
  return sigmoid(log_odds(a, b));
}

RelationScores relation_scores(const BinaryPredictor& bp,
                               const Eigen::MatrixXd& embeddings) {
  check_head(bp);
  const int w = bp.embedding_width();
  if (embeddings.cols() != w)
    throw DimensionError("relation_scores: embedding width mismatch");
  Eigen::RowVectorXd diff = bp.head.weight.row(0);
  double offset = bp.head.bias(0);
  if (bp.kind == BinaryHeadKind::kSoftmax) {
    diff -= bp.head.weight.row(1);
    offset -= bp.head.bias(1);
  }
  RelationScores s;
  s.first = embeddings * diff.leftCols(w).transpose();
  s.second = embeddings * diff.rightCols(w).transpose();
  s.offset = offset;
  return s;
}

PairDataset build_pair_dataset(std::vector<RatedModel> models, double accuracy_scale) {
  if (models.size() < 2) throw UsageError("pair dataset: need at least 2 models");
  if (!(accuracy_scale > 0.0)) throw ConfigError("pair dataset: scale must be > 0");
  std::set<std::string_view> seen;
  for (const RatedModel& m : models) {
    if (!seen.insert(m.arch_id).second)
      throw UsageError("pair dataset: duplicate arch_id '" + m.arch_id + "'");
    if (!std::isfinite(m.accuracy))
      throw ValidationError("pair dataset: non-finite accuracy for " + m.arch_id);
  }
  PairDataset data;
  data.accuracy_scale = accuracy_scale;
  const int n = static_cast<int>(models.size());
  data.pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        data.pairs.push_back(
            {i, j, softmax_pair(models[i].accuracy, models[j].accuracy, accuracy_scale)});
  data.models = std::move(models);
  return data;
}

double pair_target(const PairDataset& data, const PairSample& pair,
                   BinaryHeadKind kind, PairLabels labels) {
  if (kind == BinaryHeadKind::kSoftmax) return pair.target[0];
  const double a = data.models[pair.first].accuracy / data.accuracy_scale;
  const double b = data.models[pair.second].accuracy / data.accuracy_scale;
  if (labels == PairLabels::kHard) return a > b ? 1.0 : (a < b ? 0.0 : 0.5);
  return std::clamp((a - b + 1.0) / 2.0, 0.0, 1.0);
}

double binary_loss(const BinaryPredictor& bp, const PairDataset& data,
                   std::span<const PairSample> pairs, PairLabels labels,
                   const ForwardOptions& options, BinaryGradients* grads) {
  check_head(bp);
  if (pairs.empty()) throw UsageError("binary_loss: empty pair batch");

  std::vector<int> local(data.models.size(), -1);
  std::vector<const EncodedGraph*> graphs;
  for (const PairSample& p : pairs) {
    for (int idx : {p.first, p.second}) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= data.models.size())
        throw DimensionError("binary_loss: pair index out of range");
      if (local[idx] < 0) {
        local[idx] = static_cast<int>(graphs.size());
        graphs.push_back(&data.models[idx].graph);
      }
    }
  }

  BatchForward fb = forward_batch(bp.trunk, graphs, options);
  const Eigen::MatrixXd& e = fb.embeddings;
  const int w = bp.embedding_width();
  const int rows = bp.head.outputs();
  const auto wa = bp.head.weight.leftCols(w);
  const auto wb = bp.head.weight.rightCols(w);
  const Eigen::MatrixXd la = e * wa.transpose();
  const Eigen::MatrixXd lb = e * wb.transpose();

  const double inv_pairs = 1.0 / static_cast<double>(pairs.size());
  Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(e.rows(), rows);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(e.rows(), rows);
  Eigen::VectorXd db = Eigen::VectorXd::Zero(rows);
  double loss = 0.0;
  for (const PairSample& p : pairs) {
    const int i = local[p.first];
    const int j = local[p.second];
    const Eigen::VectorXd logits =
        la.row(i).transpose() + lb.row(j).transpose() + bp.head.bias;
    const double d = log_odds_from_logits(bp.kind, logits);
    const double t = pair_target(data, p, bp.kind, labels);
    // Cross-entropy of t against sigmoid(d); KL subtracts the target entropy.
    double term = t * softplus(-d) + (1.0 - t) * softplus(d);
    if (bp.kind == BinaryHeadKind::kSoftmax) term += xlogx(t) + xlogx(1.0 - t);
    loss += term;
    if (grads == nullptr) continue;
    const double g = (sigmoid(d) - t) * inv_pairs;
    sa(i, 0) += g;
    sb(j, 0) += g;
    db(0) += g;
    if (rows == 2) {
      sa(i, 1) -= g;
      sb(j, 1) -= g;
      db(1) -= g;
    }
  }
  loss *= inv_pairs;
  if (grads == nullptr) return loss;

  grads->head.weight.resize(rows, 2 * w);
  grads->head.weight.leftCols(w).noalias() = sa.transpose() * e;
  grads->head.weight.rightCols(w).noalias() = sb.transpose() * e;
  grads->head.bias = db;
  const Eigen::MatrixXd de = sa * wa + sb * wb;
  grads->trunk = backward(bp.trunk, fb.tape, de);
  return loss;
}

std::vector<std::span<double>> parameter_views(BinaryPredictor& bp) {
  std::vector<std::span<double>> out = parameter_views(bp.trunk);
  out.emplace_back(bp.head.weight.data(), static_cast<std::size_t>(bp.head.weight.size()));
  out.emplace_back(bp.head.bias.data(), static_cast<std::size_t>(bp.head.bias.size()));
  return out;
}

std::vector<std::span<const double>> gradient_views(const BinaryGradients& grads) {
  std::vector<std::span<const double>> out;
  for (const Eigen::MatrixXd& w : grads.trunk)
    out.emplace_back(w.data(), static_cast<std::size_t>(w.size()));
  out.emplace_back(grads.head.weight.data(),
                   static_cast<std::size_t>(grads.head.weight.size()));
  out.emplace_back(grads.head.bias.data(), static_cast<std::size_t>(grads.head.bias.size()));
  return out;
}

namespace {

// Smallest group whose ordered pairs fill one batch.
int group_size_for(int batch_size, int num_models) {
  int m = 2;
  while (m * (m - 1) < batch_size) ++m;
  return std::min(m, num_models);
}

std::vector<std::vector<PairSample>> model_group_batches(const PairDataset& data,
                                                         int batch_size, Rng& rng) {
  const int n = static_cast<int>(data.models.size());
  const int m = group_size_for(batch_size, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<int>> groups;
  for (int start = 0; start < n; start += m)
    groups.emplace_back(order.begin() + start, order.begin() + std::min(n, start + m));
  // A trailing singleton has no pairs; fold it into the previous group.
  if (groups.size() > 1 && groups.back().size() == 1) {
    groups[groups.size() - 2].push_back(groups.back().front());
    groups.pop_back();
  }

  std::vector<std::vector<PairSample>> batches;
  for (const std::vector<int>& g : groups) {
    std::vector<PairSample> batch;
    for (int a : g)
      for (int b : g)
        if (a != b)
          batch.push_back({a, b,
                           softmax_pair(data.models[a].accuracy, data.models[b].accuracy,
                                        data.accuracy_scale)});
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<std::vector<PairSample>> shuffled_pair_batches(const PairDataset& data,
                                                           int batch_size, Rng& rng) {
  std::vector<std::size_t> order(data.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<PairSample>> batches;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    std::vector<PairSample> batch;
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    for (std::size_t i = start; i < end; ++i) batch.push_back(data.pairs[order[i]]);
    batches.push_back(std::move(batch));
  }
  return batches;
}

BinaryTrainResult train_binary_impl(const BinaryPredictor& init,
                                    const PairDataset& train, const TrainConfig& config,
                                    const BinaryTrainOptions& options,
                                    const PairDataset* validation) {
  config.validate();
  if (train.pairs.empty() || train.models.size() < 2)
    throw UsageError("train_binary: empty pair set");
  check_head(init);
  const PairDataset& monitor = validation != nullptr ? *validation : train;
  if (monitor.pairs.empty()) throw UsageError("train_binary: empty validation set");

  const detail::ScopedFlushDenormals flush;
  BinaryPredictor bp = init;
  Rng shuffle_rng = make_rng(config.rng_seed, "binary-shuffle");
  Rng dropout_rng = make_rng(config.rng_seed, "binary-dropout");
  AdamW opt({.weight_decay = config.weight_decay});
  LrSchedule schedule = config.make_schedule();
  const ForwardOptions fwd{.train_mode = true, .dropout = config.dropout,
                           .rng = &dropout_rng};

  BinaryTrainResult result;
  result.predictor = bp;
  result.report.best_val_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto batches =
        options.batching == PairBatching::kModelGroups
            ? model_group_batches(train, config.batch_size, shuffle_rng)
            : shuffled_pair_batches(train, config.batch_size, shuffle_rng);
    double epoch_loss = 0.0;
    for (const std::vector<PairSample>& batch : batches) {
      BinaryGradients grads;
      epoch_loss += binary_loss(bp, train, batch, options.labels, fwd, &grads);
      opt.step(parameter_views(bp), gradient_views(grads), schedule.lr());
      ++bp.trunk.generation;
    }
    const double val_loss =
        binary_loss(bp, monitor, monitor.pairs, options.labels, {}, nullptr);
    if (!std::isfinite(val_loss))
      throw DegenerateError("train_binary: loss diverged at epoch " +
                            std::to_string(epoch));
    result.report.train_loss.push_back(epoch_loss / static_cast<double>(batches.size()));
    result.report.val_loss.push_back(val_loss);
    result.report.epochs_run = epoch + 1;
    if (val_loss < result.report.best_val_loss) {
      result.report.best_val_loss = val_loss;
      result.report.best_epoch = epoch;
      result.predictor = bp;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
    schedule.step(epoch + 1, val_loss);
  }
  return result;
}

}  // namespace

BinaryTrainResult train_binary(const BinaryPredictor& bp, const PairDataset& train,
                               const TrainConfig& config,
                               const BinaryTrainOptions& options,
                               const PairDataset* validation) {
  return train_binary_impl(bp, train, config, options, validation);
}

BinaryTrainResult train_binary_soft_sigmoid(const BinaryPredictor& bp,
                                            const PairDataset& train,
                                            const TrainConfig& config,
                                            PairLabels labels,
                                            const PairDataset* validation) {
  if (bp.kind != BinaryHeadKind::kSigmoid)
    throw UsageError("train_binary_soft_sigmoid: predictor needs a sigmoid head");
  return train_binary_impl(bp, train, config,
                           {.batching = PairBatching::kModelGroups, .labels = labels},
                           validation);
}

double pairwise_accuracy(const BinaryPredictor& bp, const PairDataset& data) {
  std::vector<const EncodedGraph*> graphs;
  for (const RatedModel& m : data.models) graphs.push_back(&m.graph);
  const RelationScores s = relation_scores(bp, embed(bp.trunk, graphs));
  std::int64_t correct = 0;
  std::int64_t total = 0;
  for (std::size_t a = 0; a < data.models.size(); ++a)
    for (std::size_t b = 0; b < data.models.size(); ++b) {
      if (a == b || data.models[a].accuracy == data.models[b].accuracy) continue;
      ++total;
      if ((s.log_odds(a, b) > 0.0) == (data.models[a].accuracy > data.models[b].accuracy))
        ++correct;
    }
  if (total == 0) throw DegenerateError("pairwise_accuracy: all accuracies equal");
  return static_cast<double>(correct) / static_cast<double>(total);
}

// ---------------------------------------------------------------- checkpoints

void save_unary(const std::filesystem::path& path, const GcnModel& model,
                std::string_view kind, const std::string& metadata) {
  if (kind != kKindUnaryLatency && kind != kKindUnaryAccuracy)
    throw UsageError("save_unary: unknown kind '" + std::string(kind) + "'");
  Checkpoint ckpt{std::string(kind), metadata, {}};
  append_model(ckpt, model);
  write_checkpoint(path, ckpt);
}

GcnModel load_unary(const std::filesystem::path& path, std::string* kind) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.kind != kKindUnaryLatency && ckpt.kind != kKindUnaryAccuracy)
    throw ValidationError("checkpoint " + path.string() + " holds a '" + ckpt.kind +
                          "' model, expected a unary predictor");
  if (kind != nullptr) *kind = ckpt.kind;
  GcnModel model = model_from(ckpt);
  if (!model.has_head()) throw ValidationError("unary checkpoint lacks a head");
  return model;
}

void save_binary(const std::filesystem::path& path, const BinaryPredictor& bp,
                 const std::string& metadata) {
  check_head(bp);
  Checkpoint ckpt{std::string(kKindBinary), metadata, {}};
  append_model(ckpt, bp.trunk, "trunk.");
  ckpt.tensors.push_back(to_tensor("relation.weight", bp.head.weight));
  ckpt.tensors.push_back(to_tensor("relation.bias", bp.head.bias));
  write_checkpoint(path, ckpt);
}

BinaryPredictor load_binary(const std::filesystem::path& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.kind != kKindBinary)
    throw ValidationError("checkpoint " + path.string() + " holds a '" + ckpt.kind +
                          "' model, expected a binary predictor");
  BinaryPredictor bp;
  bp.trunk = model_from(ckpt, "trunk.");
  bp.head.weight = matrix_from(ckpt.tensor("relation.weight"));
  bp.head.bias = vector_from(ckpt.tensor("relation.bias"));
  bp.kind = bp.head.outputs() == 1 ? BinaryHeadKind::kSigmoid : BinaryHeadKind::kSoftmax;
  check_head(bp);
  return bp;
}

}  // namespace hwnas
