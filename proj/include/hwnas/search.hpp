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

#ifndef HWNAS_SEARCH_HPP_
#define HWNAS_SEARCH_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hwnas/benchmark_store.hpp"
#include "hwnas/graph_encoding.hpp"
#include "hwnas/predictors.hpp"
#include "hwnas/training.hpp"

namespace hwnas {

// Immutable view of a benchmark table prepared for search: every entry's
// cell and its deduplicated encoding. Build once and share across runs.
class SearchSpaceIndex {
 public:
  // `device` selects the measured latency column; empty disables latency.
  SearchSpaceIndex(const BenchmarkTable& table, std::string device);

  const BenchmarkTable& table() const { return *table_; }
  const std::string& device() const { return device_; }
  std::size_t size() const { return ids_.size(); }
  const std::string& arch_id(std::size_t i) const { return ids_[i]; }
  const CellGraph& cell(std::size_t i) const { return cells_[i]; }
  std::optional<std::size_t> find(std::string_view arch_id) const;

  // Distinct encodings; several cells can share one after optimization.
  const std::vector<EncodedGraph>& unique_graphs() const { return unique_graphs_; }
  std::size_t encoding_of(std::size_t i) const { return encoding_of_[i]; }
  const EncodedGraph& graph(std::size_t i) const {
    return unique_graphs_[encoding_of_[i]];
  }

  // Measured latency on the selected device; throws UsageError when none.
  double measured_latency(std::size_t i) const;
  bool has_latency() const { return !device_.empty(); }

 private:
  const BenchmarkTable* table_;
  std::string device_;
  std::vector<std::string> ids_;
  std::vector<CellGraph> cells_;
  std::vector<EncodedGraph> unique_graphs_;
  std::vector<std::size_t> encoding_of_;
  std::vector<double> latency_;
  std::map<std::string, std::size_t, std::less<>> position_;
};

struct TrainedModel {
  int step = 0;  // 1-based count of trained models including this one
  std::string arch_id;
  double accuracy = 0.0;
  std::optional<double> measured_latency_ms;
  std::optional<double> predicted_latency_ms;
  bool feasible = true;
  double incumbent = 0.0;  // best feasible accuracy after this model
  std::string phase;       // "iteration-<i>", "final", "init", "evolve", "random"
};

struct TrajectoryPoint {
  int trained = 0;
  double incumbent = 0.0;
};

struct SearchResult {
  std::string best_arch_id;  // empty if no feasible model was trained
  double best_accuracy = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<TrainedModel> trained_set;
  // Candidates examined in the final phase that were skipped as infeasible
  // or missing because the candidate list ran out.
  int final_phase_shortfall = 0;
  std::int64_t comparator_calls = 0;
};

// Orders candidates after fitting on the models trained so far.
class CandidateRanker {
 public:
  virtual ~CandidateRanker() = default;
  virtual void fit(const SearchSpaceIndex& space,
                   std::span<const TrainedModel> trained) = 0;
  // Returns `candidates` reordered best-first.
  virtual RankingResult rank(const SearchSpaceIndex& space,
                             std::span<const std::size_t> candidates) = 0;
};

struct BinaryRankerConfig {
  GcnShape shape;
  BinaryHeadKind head = BinaryHeadKind::kSoftmax;
  BinaryTrainOptions train;
  // Overrides the accuracy-predictor protocol when set (seed is still
  // derived per fit).
  std::optional<TrainConfig> train_config;
  double accuracy_scale = kDefaultAccuracyScale;
  // Optional trunk initialization, e.g. from a latency predictor.
  std::shared_ptr<const GcnModel> transfer_from;
};

// Binary relation predictor retrained (warm) on all ordered pairs of the
// trained set at every fit.
class BinaryRelationRanker final : public CandidateRanker {
 public:
  BinaryRelationRanker(BinaryRankerConfig config, int budget_k, std::uint64_t seed);

  void fit(const SearchSpaceIndex& space, std::span<const TrainedModel> trained) override;
  RankingResult rank(const SearchSpaceIndex& space,
                     std::span<const std::size_t> candidates) override;

  const BinaryPredictor& predictor() const { return bp_; }
  int fits() const { return fits_; }

 private:
  BinaryRankerConfig config_;
  int budget_k_;
  std::uint64_t seed_;
  BinaryPredictor bp_;
  int fits_ = 0;
};

// Perfect comparator from the table's accuracies; for tests and bounds.
class OracleRanker final : public CandidateRanker {
 public:
  explicit OracleRanker(AccuracyMetric metric = AccuracyMetric::kValidation)
      : metric_(metric) {}
  void fit(const SearchSpaceIndex&, std::span<const TrainedModel>) override {}
  RankingResult rank(const SearchSpaceIndex& space,
                     std::span<const std::size_t> candidates) override;

 private:
  AccuracyMetric metric_;
};

struct SearchConfig {
  int budget_k = 100;
  int iterations = 5;
  double alpha = 0.5;
  int total_m = 140;
  std::optional<double> latency_limit_ms;
  // Predicted latency per SearchSpaceIndex position; when absent the
  // candidate filter falls back to measured latency.
  std::shared_ptr<const std::vector<double>> predicted_latency;
  std::uint64_t rng_seed = 0;
  AccuracyMode accuracy_mode = AccuracyMode::kFixedSeed;
  AccuracyMetric accuracy_metric = AccuracyMetric::kValidation;

  void validate() const;  // ConfigError
};

struct EvolutionConfig {
  int pool_size = 64;
  int sample_size = 16;
  bool cached = false;
  // Upper bound on mutation attempts for cached runs, as a multiple of M,
  // so a saturated neighbourhood cannot loop forever.
  int max_attempts_factor = 100;
};

using SearchObserver = std::function<void(const TrainedModel&)>;

// Iterative data selection with a relation ranker. `ranker` defaults to a
// BinaryRelationRanker with the accuracy-predictor protocol.
SearchResult brp_nas_search(const SearchSpaceIndex& space, const SearchConfig& config,
                            CandidateRanker* ranker = nullptr,
                            const SearchObserver& observer = {});

// Regularized (aging) evolution over NB-201 cells; M counts every trained
// model, the initial pool included.
SearchResult aging_evolution(const SearchSpaceIndex& space, const SearchConfig& config,
                             const EvolutionConfig& evo,
                             const SearchObserver& observer = {});

// M uniform draws with replacement.
SearchResult random_search(const SearchSpaceIndex& space, const SearchConfig& config,
                           const SearchObserver& observer = {});

// Resamples one of the six op slots to a different op.
CellGraph mutate_nb201(const CellGraph& parent, Rng& rng);

// Candidate positions that pass the latency filter (all when unconstrained).
std::vector<std::size_t> feasible_candidates(const SearchSpaceIndex& space,
                                             const SearchConfig& config);

// One JSON object per line, fields: step, phase, arch_id, accuracy,
// measured_latency_ms, predicted_latency_ms, feasible, incumbent.
std::string to_jsonl(const SearchResult& result);

}  // namespace hwnas

#endif  // HWNAS_SEARCH_HPP_
