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

#include "hwnas/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fp_env.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {

namespace {

constexpr int kEmbedChunk = 256;

void check_batch(const GcnModel& model,
                 std::span<const EncodedGraph* const> graphs) {
  if (model.layers.empty()) throw UsageError("gcn: model has no layers");
  if (graphs.empty()) throw DimensionError("gcn: empty batch");
  const int n = graphs.front()->n();
  for (const EncodedGraph* g : graphs) {
    if (g->n() != n || g->adjacency.cols() != n || g->features.rows() != n)
      throw DimensionError("gcn: graphs in a batch must share one node count");
    if (g->d() != model.input_width())
      throw DimensionError("gcn: feature width " + std::to_string(g->d()) +
                           " does not match model input " +
                           std::to_string(model.input_width()));
  }
}

// Samples the inverted-dropout scale for every element of `gate` in place.
void apply_dropout(Eigen::MatrixXd& gate, const ForwardOptions& options) {
  if (!options.train_mode || options.dropout <= 0.0) return;
  if (options.dropout >= 1.0) throw UsageError("gcn: dropout must be < 1");
  if (options.rng == nullptr) throw UsageError("gcn: dropout requires an rng");
  // Compare raw 64-bit draws against a fixed threshold: one engine call per
  // element and no floating-point conversion.
  const auto threshold =
      static_cast<Rng::result_type>(std::ldexp(options.dropout, 64));
  const double scale = 1.0 / (1.0 - options.dropout);
  double* p = gate.data();
  for (Eigen::Index i = 0; i < gate.size(); ++i)
    p[i] = (*options.rng)() >= threshold ? p[i] * scale : 0.0;
}

Eigen::MatrixXd stacked_features(std::span<const EncodedGraph* const> graphs) {
  const int n = graphs.front()->n();
  Eigen::MatrixXd h(static_cast<Eigen::Index>(graphs.size()) * n,
                    graphs.front()->d());
  for (std::size_t b = 0; b < graphs.size(); ++b)
    h.middleRows(static_cast<Eigen::Index>(b) * n, n) = graphs[b]->features;
  return h;
}

}  // namespace

struct GcnKernels {
  // Runs the network; when `tape` is non-null records what backward needs.
  static Eigen::MatrixXd run(const GcnModel& model,
                             std::span<const EncodedGraph* const> graphs,
                             const ForwardOptions& options, ForwardTape* tape) {
    check_batch(model, graphs);
    const int batch = static_cast<int>(graphs.size());
    const int n = graphs.front()->n();
    const int global = n - 1;
    const int full_layers = model.num_layers() - 1;

    if (tape != nullptr) {
      tape->model_ = &model;
      tape->generation_ = model.generation;
      tape->consumed_ = false;
      tape->batch_ = batch;
      tape->nodes_ = n;
      tape->adjacency_.clear();
      tape->adjacency_.reserve(graphs.size());
      for (const EncodedGraph* g : graphs) tape->adjacency_.push_back(g->adjacency);
      tape->aggregated_.assign(full_layers, {});
      tape->gate_.assign(full_layers, {});
    }

    Eigen::MatrixXd h = stacked_features(graphs);
    Eigen::MatrixXd aggregated(h.rows(), h.cols());
    for (int l = 0; l < full_layers; ++l) {
      aggregated.resize(h.rows(), h.cols());
      for (int b = 0; b < batch; ++b)
        aggregated.middleRows(b * n, n).noalias() =
            graphs[b]->adjacency * h.middleRows(b * n, n);
      Eigen::MatrixXd z;
      z.noalias() = aggregated * model.layers[l];
      Eigen::MatrixXd gate = (z.array() > 0.0).cast<double>().matrix();
      apply_dropout(gate, options);
      h = z.cwiseProduct(gate);
      if (tape != nullptr) {
        tape->aggregated_[l] = aggregated;
        tape->gate_[l] = std::move(gate);
      }
    }

    Eigen::MatrixXd global_aggregated(batch, h.cols());
    for (int b = 0; b < batch; ++b)
      global_aggregated.row(b).noalias() =
          graphs[b]->adjacency.row(global) * h.middleRows(b * n, n);
    Eigen::MatrixXd z;
    z.noalias() = global_aggregated * model.layers.back();
    Eigen::MatrixXd gate = (z.array() > 0.0).cast<double>().matrix();
    apply_dropout(gate, options);
    Eigen::MatrixXd out = z.cwiseProduct(gate);
    if (tape != nullptr) {
      tape->global_aggregated_ = std::move(global_aggregated);
      tape->global_gate_ = std::move(gate);
    }
    return out;
  }

  static std::vector<Eigen::MatrixXd> back(const GcnModel& model,
                                           ForwardTape& tape,
                                           const Eigen::MatrixXd& d_emb) {
    if (tape.consumed_) throw UsageError("gcn: tape already consumed or empty");
    if (tape.model_ != &model || tape.generation_ != model.generation)
      throw UsageError("gcn: stale tape, model changed since forward");
    if (d_emb.rows() != tape.batch_ || d_emb.cols() != model.embedding_width())
      throw DimensionError("gcn: gradient shape does not match the batch");
    tape.consumed_ = true;

    const int batch = tape.batch_;
    const int n = tape.nodes_;
    const int global = n - 1;
    const int last = model.num_layers() - 1;
    std::vector<Eigen::MatrixXd> grads(model.layers.size());

    Eigen::MatrixXd dz = d_emb.cwiseProduct(tape.global_gate_);
    grads[last].noalias() = tape.global_aggregated_.transpose() * dz;
    if (last == 0) return grads;

    const Eigen::MatrixXd d_global = dz * model.layers[last].transpose();
    Eigen::MatrixXd dh(static_cast<Eigen::Index>(batch) * n, d_global.cols());
    for (int b = 0; b < batch; ++b)
      dh.middleRows(b * n, n).noalias() =
          tape.adjacency_[b].row(global).transpose() * d_global.row(b);

    for (int l = last - 1; l >= 0; --l) {
      dz = dh.cwiseProduct(tape.gate_[l]);
      grads[l].noalias() = tape.aggregated_[l].transpose() * dz;
      if (l == 0) break;
      const Eigen::MatrixXd dm = dz * model.layers[l].transpose();
      dh.resize(dm.rows(), dm.cols());
      for (int b = 0; b < batch; ++b)
        dh.middleRows(b * n, n).noalias() =
            tape.adjacency_[b].transpose() * dm.middleRows(b * n, n);
    }
    tape.aggregated_.clear();
    tape.gate_.clear();
    return grads;
  }
};

Linear make_linear(int inputs, int outputs, Rng& rng) {
  if (inputs <= 0 || outputs <= 0)
    throw DimensionError("linear layer needs positive sizes");
  const double bound = 1.0 / std::sqrt(static_cast<double>(inputs));
  std::uniform_real_distribution<double> u(-bound, bound);
  Linear out;
  out.weight = Eigen::MatrixXd::NullaryExpr(outputs, inputs, [&] { return u(rng); });
  out.bias = Eigen::VectorXd::Zero(outputs);
  return out;
}

GcnModel make_gcn(const GcnShape& shape, Rng& rng) {
  if (shape.num_layers < 1 || shape.hidden_width < 1 || shape.input_width < 1 ||
      shape.head_outputs < 0)
    throw DimensionError("gcn: invalid shape");
  GcnModel model;
  int width = shape.input_width;
  for (int l = 0; l < shape.num_layers; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(width));
    std::uniform_real_distribution<double> u(-bound, bound);
    model.layers.push_back(Eigen::MatrixXd::NullaryExpr(
        width, shape.hidden_width, [&] { return u(rng); }));
    width = shape.hidden_width;
  }
  if (shape.head_outputs > 0)
    model.head = make_linear(shape.hidden_width, shape.head_outputs, rng);
  return model;
}

BatchForward forward_batch(const GcnModel& model,
                           std::span<const EncodedGraph* const> graphs,
                           const ForwardOptions& options) {
  BatchForward out;
  out.embeddings = GcnKernels::run(model, graphs, options, &out.tape);
  return out;
}

std::pair<Eigen::VectorXd, ForwardTape> forward(const GcnModel& model,
                                                const EncodedGraph& g,
                                                const ForwardOptions& options) {
  const EncodedGraph* one[] = {&g};
  BatchForward fb = forward_batch(model, one, options);
  Eigen::VectorXd emb = fb.embeddings.row(0).transpose();
  return {std::move(emb), std::move(fb.tape)};
}

Eigen::MatrixXd embed(const GcnModel& model,
                      std::span<const EncodedGraph* const> graphs) {
  const detail::ScopedFlushDenormals flush;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(graphs.size()),
                      model.embedding_width());
  for (std::size_t start = 0; start < graphs.size(); start += kEmbedChunk) {
    const std::size_t len = std::min<std::size_t>(kEmbedChunk, graphs.size() - start);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) =
        GcnKernels::run(model, graphs.subspan(start, len), {}, nullptr);
  }
  return out;
}

Eigen::MatrixXd node_embeddings(const GcnModel& model, const EncodedGraph& g) {
  const EncodedGraph* one[] = {&g};
  check_batch(model, one);
  Eigen::MatrixXd h = g.features;
  for (const Eigen::MatrixXd& w : model.layers)
    h = ((g.adjacency * h) * w).cwiseMax(0.0);
  return h;
}

std::vector<Eigen::MatrixXd> backward(const GcnModel& model, ForwardTape& tape,
                                      const Eigen::MatrixXd& d_embeddings) {
  return GcnKernels::back(model, tape, d_embeddings);
}

Eigen::VectorXd unary_head(const GcnModel& model,
                           const Eigen::MatrixXd& embeddings) {
  if (!model.has_head() || model.head.outputs() != 1)
    throw UsageError("gcn: model has no unary head");
  if (embeddings.cols() != model.head.inputs())
    throw DimensionError("gcn: embedding width does not match head");
  Eigen::VectorXd out = embeddings * model.head.weight.row(0).transpose();
  out.array() += model.head.bias(0);
  return out;
}

double unary_loss(const GcnModel& model,
                  std::span<const EncodedGraph* const> graphs,
                  std::span<const double> targets, const ForwardOptions& options,
                  GcnGradients* grads) {
  if (targets.size() != graphs.size())
    throw DimensionError("gcn: one target per graph required");
  BatchForward fb = forward_batch(model, graphs, options);
  const Eigen::VectorXd pred = unary_head(model, fb.embeddings);
  const Eigen::Map<const Eigen::VectorXd> t(targets.data(),
                                            static_cast<Eigen::Index>(targets.size()));
  const Eigen::VectorXd diff = pred - t;
  const double batch = static_cast<double>(targets.size());
  const double loss = diff.squaredNorm() / batch;
  if (grads == nullptr) return loss;

  const Eigen::VectorXd d_pred = diff * (2.0 / batch);
  grads->head.weight = d_pred.transpose() * fb.embeddings;
  grads->head.bias = Eigen::VectorXd::Constant(1, d_pred.sum());
  const Eigen::MatrixXd d_emb = d_pred * model.head.weight.row(0);
  grads->layers = backward(model, fb.tape, d_emb);
  return loss;
}

std::vector<std::span<double>> parameter_views(GcnModel& model) {
  std::vector<std::span<double>> out;
  for (Eigen::MatrixXd& w : model.layers)
    out.emplace_back(w.data(), static_cast<std::size_t>(w.size()));
  if (model.has_head()) {
    out.emplace_back(model.head.weight.data(),
                     static_cast<std::size_t>(model.head.weight.size()));
    out.emplace_back(model.head.bias.data(),
                     static_cast<std::size_t>(model.head.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> gradient_views(const GcnGradients& grads) {
  std::vector<std::span<const double>> out;
  for (const Eigen::MatrixXd& w : grads.layers)
    out.emplace_back(w.data(), static_cast<std::size_t>(w.size()));
  if (grads.head.weight.size() > 0) {
    out.emplace_back(grads.head.weight.data(),
                     static_cast<std::size_t>(grads.head.weight.size()));
    out.emplace_back(grads.head.bias.data(),
                     static_cast<std::size_t>(grads.head.bias.size()));
  }
  return out;
}

}  // namespace hwnas
