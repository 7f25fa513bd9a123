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

#ifndef HWNAS_ANALYSIS_HPP_
#define HWNAS_ANALYSIS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwnas/search.hpp"

namespace hwnas {

// ---------------------------------------------------------------- statistics

// Linear-interpolation quantile (R type 7) of an ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Throws UsageError on length
// mismatch or fewer than 2 points and DegenerateError on a constant input.
double spearman(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------- error bounds

inline const std::vector<double> kDefaultErrorBounds = {0.01, 0.05, 0.10};

struct ErrorBoundReport {
  std::vector<double> bounds;
  std::vector<double> fraction_within;  // |pred - meas| / meas <= bound
  std::size_t count = 0;
};

ErrorBoundReport error_bound_report(std::span<const double> predictions,
                                    std::span<const double> measurements,
                                    std::span<const double> bounds = kDefaultErrorBounds);

// ---------------------------------------------------------------- Pareto

struct ParetoPoint {
  std::string arch_id;
  double accuracy = 0.0;
  double latency = 0.0;

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

// a dominates b: accuracy >= and latency <=, at least one strict.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

// Non-dominated points (identical coordinates are all kept), ordered by
// latency, then descending accuracy, then arch_id.
std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points);

// Fraction of the measured-space front whose members are also on the front
// built from predicted latencies. Both inputs list the same models.
double pareto_recovery(std::span<const ParetoPoint> measured,
                       std::span<const ParetoPoint> predicted);

// ---------------------------------------------------------------- oracle NAS

struct OracleInput {
  std::string arch_id;
  double accuracy = 0.0;
  double latency = 0.0;    // measured
  double predicted = 0.0;  // predictor output
};

// A model is predicted-feasible when predicted <= threshold and truly
// feasible when latency <= threshold.
struct OracleReport {
  double threshold = 0.0;
  bool feasible = false;  // the truly feasible set is non-empty
  std::int64_t n_false_pos = 0;
  std::int64_t n_false_neg = 0;
  std::int64_t n_true_pos = 0;
  std::int64_t n_true_neg = 0;
  std::string assumed_best;       // argmax over predicted-feasible
  std::string effective_best;     // argmax over true positives
  std::string ground_truth_best;  // argmax over truly feasible
  double assumed_best_accuracy = 0.0;
  double effective_best_accuracy = 0.0;
  double ground_truth_best_accuracy = 0.0;
  // A missing best counts as accuracy 0, so a predictor that accepts no
  // truly feasible model misses the whole ground-truth accuracy.
  double missed_accuracy = 0.0;
  double overclaimed_accuracy = 0.0;
  double miss_latency_error = 0.0;       // pred - lat of the ground-truth best
  double overclaim_latency_error = 0.0;  // pred - lat of the assumed best
};

// Argmax ties go to the lower measured latency, then the smaller arch_id.
std::vector<OracleReport> oracle_nas_analysis(std::span<const OracleInput> models,
                                              std::span<const double> thresholds);

// lo, lo + step, ..., hi (inclusive within half a step).
std::vector<double> threshold_sweep(double lo, double hi, double step);

double mean_missed_accuracy(std::span<const OracleReport> reports);

// ---------------------------------------------------------------- relations

// p(a better than b) for model indices a, b.
using RelationFn = std::function<double(std::size_t, std::size_t)>;

RelationFn relation_fn(const BinaryPredictor& bp, const Eigen::MatrixXd& embeddings);

// Fraction of unordered pairs whose two orderings disagree in sign around
// 0.5; exact 0.5 on either side counts as a violation.
double antisymmetry_rate(const RelationFn& relation,
                         std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct CycleProbeResult {
  std::int64_t cycles = 0;
  bool saturated = false;
};

inline constexpr std::int64_t kDefaultCycleCutoff = 10'000'000;

// Counts simple cycles of the digraph with an edge a -> b whenever
// p(a, b) > 0.5 (exact 0.5 gives no edge), stopping at `cutoff`.
CycleProbeResult cycle_probe(const RelationFn& relation, std::size_t n,
                             std::int64_t cutoff = kDefaultCycleCutoff);

// Same on an explicit adjacency list.
CycleProbeResult count_simple_cycles(const std::vector<std::vector<int>>& adjacency,
                                     std::int64_t cutoff = kDefaultCycleCutoff);

// ---------------------------------------------------------------- trajectories

struct TrajectoryBands {
  std::vector<int> steps;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
};

// Pads shorter runs with their last incumbent. Throws UsageError when empty.
TrajectoryBands trajectory_aggregate(std::span<const SearchResult> runs);

// ---------------------------------------------------------------- reports

void write_error_bound_csv(const std::filesystem::path& path,
                           std::span<const ErrorBoundReport> trials);
void write_oracle_csv(const std::filesystem::path& path,
                      std::span<const OracleReport> reports);
void write_pareto_csv(const std::filesystem::path& path,
                      std::span<const ParetoPoint> points);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryBands& bands);

}  // namespace hwnas

#endif  // HWNAS_ANALYSIS_HPP_
