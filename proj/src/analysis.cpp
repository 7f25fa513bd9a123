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

#include "hwnas/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {

// ---------------------------------------------------------------- statistics

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile level must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw UsageError("spearman: length mismatch");
  if (xs.size() < 2) throw UsageError("spearman: need at least 2 points");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateError("spearman: correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------- error bounds

ErrorBoundReport error_bound_report(std::span<const double> predictions,
                                    std::span<const double> measurements,
                                    std::span<const double> bounds) {
  if (predictions.size() != measurements.size())
    throw UsageError("error_bound_report: length mismatch");
  if (predictions.empty()) throw UsageError("error_bound_report: empty input");
  ErrorBoundReport r;
  r.bounds.assign(bounds.begin(), bounds.end());
  r.count = predictions.size();
  std::vector<double> rel(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!(measurements[i] > 0.0))
      throw ValidationError("error_bound_report: measurements must be positive");
    rel[i] = std::abs(predictions[i] - measurements[i]) / measurements[i];
  }
  for (double b : bounds) {
    if (!(b >= 0.0)) throw UsageError("error_bound_report: bounds must be >= 0");
    const auto within = std::count_if(rel.begin(), rel.end(), [b](double e) { return e <= b; });
    r.fraction_within.push_back(static_cast<double>(within) / static_cast<double>(rel.size()));
  }
  return r;
}

// ---------------------------------------------------------------- Pareto

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.accuracy >= b.accuracy && a.latency <= b.latency &&
         (a.accuracy > b.accuracy || a.latency < b.latency);
}

std::vector<ParetoPoint> pareto_front(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.latency != b.latency) return a.latency < b.latency;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.arch_id < b.arch_id;
  });
  std::vector<ParetoPoint> front;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].latency == sorted[i].latency) ++j;
    // Within one latency only the top accuracy survives, and only if no
    // faster point already reaches it.
    const double top = sorted[i].accuracy;
    if (top > best) {
      for (std::size_t k = i; k < j && sorted[k].accuracy == top; ++k)
        front.push_back(sorted[k]);
      best = top;
    }
    i = j;
  }
  return front;
}

double pareto_recovery(std::span<const ParetoPoint> measured,
                       std::span<const ParetoPoint> predicted) {
  if (measured.size() != predicted.size())
    throw UsageError("pareto_recovery: inputs must list the same models");
  const std::vector<ParetoPoint> true_front = pareto_front(measured);
  if (true_front.empty()) throw UsageError("pareto_recovery: empty input");
  std::set<std::string> predicted_ids;
  for (const ParetoPoint& p : pareto_front(predicted)) predicted_ids.insert(p.arch_id);
  const auto hits = std::count_if(true_front.begin(), true_front.end(), [&](const ParetoPoint& p) {
    return predicted_ids.contains(p.arch_id);
  });
  return static_cast<double>(hits) / static_cast<double>(true_front.size());
}

// ---------------------------------------------------------------- oracle NAS

namespace {

// True when a should replace the current best b.
bool better_oracle(const OracleInput& a, const OracleInput& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.latency != b.latency) return a.latency < b.latency;
  return a.arch_id < b.arch_id;
}

}  // namespace

std::vector<OracleReport> oracle_nas_analysis(std::span<const OracleInput> models,
                                              std::span<const double> thresholds) {
  if (models.empty()) throw UsageError("oracle analysis: no models");
  std::vector<OracleReport> reports;
  for (double th : thresholds) {
    OracleReport r;
    r.threshold = th;
    const OracleInput* assumed = nullptr;
    const OracleInput* effective = nullptr;
    const OracleInput* truth = nullptr;
    for (const OracleInput& m : models) {
      const bool pred_pos = m.predicted <= th;
      const bool true_pos = m.latency <= th;
      if (pred_pos && true_pos) ++r.n_true_pos;
      if (pred_pos && !true_pos) ++r.n_false_pos;
      if (!pred_pos && true_pos) ++r.n_false_neg;
      if (!pred_pos && !true_pos) ++r.n_true_neg;
      if (pred_pos && (assumed == nullptr || better_oracle(m, *assumed))) assumed = &m;
      if (pred_pos && true_pos && (effective == nullptr || better_oracle(m, *effective)))
        effective = &m;
      if (true_pos && (truth == nullptr || better_oracle(m, *truth))) truth = &m;
    }
    r.feasible = truth != nullptr;
    if (assumed) {
      r.assumed_best = assumed->arch_id;
      r.assumed_best_accuracy = assumed->accuracy;
    }
    if (effective) {
      r.effective_best = effective->arch_id;
      r.effective_best_accuracy = effective->accuracy;
    }
    if (truth) {
      r.ground_truth_best = truth->arch_id;
      r.ground_truth_best_accuracy = truth->accuracy;
    }
    r.missed_accuracy = r.ground_truth_best_accuracy - r.effective_best_accuracy;
    r.overclaimed_accuracy = r.assumed_best_accuracy - r.effective_best_accuracy;
    if (truth && truth != effective) r.miss_latency_error = truth->predicted - truth->latency;
    if (assumed && assumed != effective)
      r.overclaim_latency_error = assumed->predicted - assumed->latency;
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<double> threshold_sweep(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("threshold sweep: need step > 0, hi >= lo");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> out;
  for (long k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

double mean_missed_accuracy(std::span<const OracleReport> reports) {
  if (reports.empty()) throw UsageError("mean_missed_accuracy: no reports");
  double sum = 0.0;
  for (const OracleReport& r : reports) sum += r.missed_accuracy;
  return sum / static_cast<double>(reports.size());
}

// ---------------------------------------------------------------- relations

RelationFn relation_fn(const BinaryPredictor& bp, const Eigen::MatrixXd& embeddings) {
  auto scores = std::make_shared<RelationScores>(relation_scores(bp, embeddings));
  return [scores](std::size_t a, std::size_t b) { return scores->p_first_better(a, b); };
}

double antisymmetry_rate(const RelationFn& relation,
                         std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  if (pairs.empty()) throw UsageError("antisymmetry_rate: no pairs");
  std::int64_t ok = 0;
  for (const auto& [a, b] : pairs) {
    const double ab = relation(a, b) - 0.5;
    const double ba = relation(b, a) - 0.5;
    if ((ab > 0.0 && ba < 0.0) || (ab < 0.0 && ba > 0.0)) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------- trajectories

TrajectoryBands trajectory_aggregate(std::span<const SearchResult> runs) {
  if (runs.empty()) throw UsageError("trajectory_aggregate: no runs");
  std::size_t len = 0;
  for (const SearchResult& r : runs) len = std::max(len, r.trajectory.size());
  TrajectoryBands bands;
  std::vector<double> column(runs.size());
  for (std::size_t s = 0; s < len; ++s) {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& t = runs[k].trajectory;
      column[k] = t.empty() ? 0.0 : t[std::min(s, t.size() - 1)].incumbent;
    }
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    bands.steps.push_back(static_cast<int>(s) + 1);
    bands.median.push_back(quantile_sorted(sorted, 0.5));
    bands.q25.push_back(quantile_sorted(sorted, 0.25));
    bands.q75.push_back(quantile_sorted(sorted, 0.75));
  }
  return bands;
}

// ---------------------------------------------------------------- reports

void write_error_bound_csv(const std::filesystem::path& path,
                           std::span<const ErrorBoundReport> trials) {
  std::ostringstream out;
  out << "trial,bound,fraction_within,count\n";
  for (std::size_t t = 0; t < trials.size(); ++t)
    for (std::size_t b = 0; b < trials[t].bounds.size(); ++b)
      out << t << ',' << csv::format_double(trials[t].bounds[b]) << ','
          << csv::format_double(trials[t].fraction_within[b]) << ',' << trials[t].count
          << '\n';
  csv::write_file_atomic(path, out.str());
}

void write_oracle_csv(const std::filesystem::path& path,
                      std::span<const OracleReport> reports) {
  std::ostringstream out;
  out << "threshold_ms,feasible,n_false_pos,n_false_neg,n_true_pos,n_true_neg,"
         "assumed_best,effective_best,ground_truth_best,assumed_best_accuracy,"
         "effective_best_accuracy,ground_truth_best_accuracy,missed_accuracy,"
         "overclaimed_accuracy,miss_latency_error_ms,overclaim_latency_error_ms\n";
  for (const OracleReport& r : reports) {
    out << csv::format_double(r.threshold) << ',' << (r.feasible ? 1 : 0) << ','
        << r.n_false_pos << ',' << r.n_false_neg << ',' << r.n_true_pos << ','
        << r.n_true_neg << ',' << r.assumed_best << ',' << r.effective_best << ','
        << r.ground_truth_best << ',' << csv::format_double(r.assumed_best_accuracy) << ','
        << csv::format_double(r.effective_best_accuracy) << ','
        << csv::format_double(r.ground_truth_best_accuracy) << ','
        << csv::format_double(r.missed_accuracy) << ','
        << csv::format_double(r.overclaimed_accuracy) << ','
        << csv::format_double(r.miss_latency_error) << ','
        << csv::format_double(r.overclaim_latency_error) << '\n';
  }
  csv::write_file_atomic(path, out.str());
}

void write_pareto_csv(const std::filesystem::path& path,
                      std::span<const ParetoPoint> points) {
  std::ostringstream out;
  out << "arch_id,accuracy,latency_ms\n";
  for (const ParetoPoint& p : points)
    out << p.arch_id << ',' << csv::format_double(p.accuracy) << ','
        << csv::format_double(p.latency) << '\n';
  csv::write_file_atomic(path, out.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryBands& bands) {
  std::ostringstream out;
  out << "step,median,q25,q75\n";
  for (std::size_t i = 0; i < bands.steps.size(); ++i)
    out << bands.steps[i] << ',' << csv::format_double(bands.median[i]) << ','
        << csv::format_double(bands.q25[i]) << ',' << csv::format_double(bands.q75[i])
        << '\n';
  csv::write_file_atomic(path, out.str());
}

}  // namespace hwnas
