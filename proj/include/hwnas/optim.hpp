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

#ifndef HWNAS_OPTIM_HPP_
#define HWNAS_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hwnas {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// Adam with decoupled weight decay:
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * w).
// Moment buffers are sized on the first step; later steps must pass views of
// identical sizes in the same order.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {});

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads, double lr);

  std::int64_t steps() const { return steps_; }
  const AdamWConfig& config() const { return config_; }

 private:
  AdamWConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

enum class ScheduleKind : std::uint8_t { kPlateau, kCosine, kConstant };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view s);

// Per-epoch learning-rate policy.
//   plateau: multiply by `factor` once the validation metric has failed to
//            improve for `patience` consecutive epochs, then reset the count.
//   cosine:  lr0 * (1 + cos(pi * epoch / max_epochs)) / 2.
class LrSchedule {
 public:
  static LrSchedule plateau(double lr0, double factor = 0.5, int patience = 10);
  static LrSchedule cosine(double lr0, int max_epochs);
  static LrSchedule constant(double lr0);

  ScheduleKind kind() const { return kind_; }
  double lr() const { return lr_; }
  double initial_lr() const { return lr0_; }

  // Records the end of `epoch` (number of completed epochs, >= 1) with its
  // validation metric and returns the rate for the next epoch.
  double step(int epoch, double val_metric);

 private:
  LrSchedule(ScheduleKind kind, double lr0);

  ScheduleKind kind_;
  double lr0_;
  double lr_;
  double factor_ = 0.5;
  int patience_ = 10;
  int max_epochs_ = 1;
  double best_;
  int bad_epochs_ = 0;
};

}  // namespace hwnas

#endif  // HWNAS_OPTIM_HPP_
