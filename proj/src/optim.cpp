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

#include "hwnas/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hwnas/errors.hpp"

namespace hwnas {

AdamW::AdamW(AdamWConfig config) : config_(config) {
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 >= 0.0 && config_.beta2 < 1.0) || !(config_.epsilon > 0.0) ||
      !(config_.weight_decay >= 0.0))
    throw ConfigError("adamw: invalid hyperparameters");
}

void AdamW::step(std::span<const std::span<double>> params,
                 std::span<const std::span<const double>> grads, double lr) {
  if (params.size() != grads.size())
    throw DimensionError("adamw: parameter and gradient counts differ");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size())
    throw DimensionError("adamw: parameter list changed between steps");
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::span<double> w = params[k];
    const std::span<const double> g = grads[k];
    if (w.size() != g.size() || w.size() != m_[k].size())
      throw DimensionError("adamw: tensor " + std::to_string(k) + " changed size");
    // Single fused pass; the optimizer is bound by memory traffic.
    double* m = m_[k].data();
    double* v = v_[k].data();
    double* wp = w.data();
    const double* gp = g.data();
    const double wd = config_.weight_decay;
    const double eps = config_.epsilon;
    const double inv_c1 = 1.0 / c1;
    const double inv_c2 = 1.0 / c2;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double mi = b1 * m[i] + (1.0 - b1) * gp[i];
      const double vi = b2 * v[i] + (1.0 - b2) * gp[i] * gp[i];
      m[i] = mi;
      v[i] = vi;
      wp[i] -= lr * ((mi * inv_c1) / (std::sqrt(vi * inv_c2) + eps) + wd * wp[i]);
    }
  }
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kPlateau: return "plateau";
    case ScheduleKind::kCosine: return "cosine";
    case ScheduleKind::kConstant: return "constant";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "plateau") return ScheduleKind::kPlateau;
  if (s == "cosine") return ScheduleKind::kCosine;
  if (s == "constant") return ScheduleKind::kConstant;
  throw ConfigError("unknown lr schedule '" + std::string(s) + "'");
}

LrSchedule::LrSchedule(ScheduleKind kind, double lr0)
    : kind_(kind), lr0_(lr0), lr_(lr0),
      best_(std::numeric_limits<double>::infinity()) {
  if (!(lr0 > 0.0)) throw ConfigError("lr schedule: initial lr must be > 0");
}

LrSchedule LrSchedule::plateau(double lr0, double factor, int patience) {
  if (!(factor > 0.0 && factor < 1.0) || patience < 1)
    throw ConfigError("plateau schedule: need 0 < factor < 1 and patience >= 1");
  LrSchedule s(ScheduleKind::kPlateau, lr0);
  s.factor_ = factor;
  s.patience_ = patience;
  return s;
}

LrSchedule LrSchedule::cosine(double lr0, int max_epochs) {
  if (max_epochs < 1) throw ConfigError("cosine schedule: max_epochs must be >= 1");
  LrSchedule s(ScheduleKind::kCosine, lr0);
  s.max_epochs_ = max_epochs;
  return s;
}

LrSchedule LrSchedule::constant(double lr0) {
  return LrSchedule(ScheduleKind::kConstant, lr0);
}

double LrSchedule::step(int epoch, double val_metric) {
  switch (kind_) {
    case ScheduleKind::kPlateau:
      if (val_metric < best_) {
        best_ = val_metric;
        bad_epochs_ = 0;
      } else if (++bad_epochs_ >= patience_) {
        lr_ *= factor_;
        bad_epochs_ = 0;
      }
      break;
    case ScheduleKind::kCosine: {
      const double e = std::min<double>(epoch, max_epochs_);
      lr_ = lr0_ * 0.5 * (1.0 + std::cos(std::numbers::pi * e / max_epochs_));
      break;
    }
    case ScheduleKind::kConstant:
      break;
  }
  return lr_;
}

}  // namespace hwnas
