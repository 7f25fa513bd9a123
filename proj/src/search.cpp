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

#include "hwnas/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "hwnas/errors.hpp"
#include "json.hpp"

namespace hwnas {

// ---------------------------------------------------------------- index

namespace {

std::string encoding_key(const EncodedGraph& g) {
  std::string key(sizeof(double) * static_cast<std::size_t>(g.adjacency.size() +
                                                           g.features.size()),
                  '\0');
  std::memcpy(key.data(), g.adjacency.data(),
              sizeof(double) * static_cast<std::size_t>(g.adjacency.size()));
  std::memcpy(key.data() + sizeof(double) * static_cast<std::size_t>(g.adjacency.size()),
              g.features.data(),
              sizeof(double) * static_cast<std::size_t>(g.features.size()));
  return key;
}

}  // namespace

SearchSpaceIndex::SearchSpaceIndex(const BenchmarkTable& table, std::string device)
    : table_(&table), device_(std::move(device)) {
  if (table.size() == 0) throw UsageError("search: benchmark table is empty");
  if (!device_.empty() && !table.has_device(device_))
    throw LookupError("search: table has no latency column for device '" + device_ +
                      "'");
  std::map<std::string, std::size_t> unique;
  for (const auto& [id, entry] : table.entries()) {
    const std::size_t pos = ids_.size();
    ids_.push_back(id);
    cells_.push_back(table.cell(id));
    EncodedGraph g = encode_cell(cells_.back());
    auto [it, inserted] = unique.try_emplace(encoding_key(g), unique_graphs_.size());
    if (inserted) unique_graphs_.push_back(std::move(g));
    encoding_of_.push_back(it->second);
    if (!device_.empty()) latency_.push_back(entry.latency_ms.at(device_));
    position_.emplace(id, pos);
  }
}

std::optional<std::size_t> SearchSpaceIndex::find(std::string_view arch_id) const {
  const auto it = position_.find(arch_id);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

double SearchSpaceIndex::measured_latency(std::size_t i) const {
  if (device_.empty()) throw UsageError("search: no latency device selected");
  return latency_[i];
}

// ---------------------------------------------------------------- rankers

BinaryRelationRanker::BinaryRelationRanker(BinaryRankerConfig config, int budget_k,
                                           std::uint64_t seed)
    : config_(std::move(config)), budget_k_(budget_k), seed_(seed) {
  Rng rng = make_rng(seed_, "binary-init");
  bp_ = make_binary_predictor(config_.shape, config_.head, rng);
  if (config_.transfer_from) transfer_trunk(bp_, *config_.transfer_from);
}

void BinaryRelationRanker::fit(const SearchSpaceIndex& space,
                               std::span<const TrainedModel> trained) {
  std::vector<RatedModel> models;
  std::map<std::string_view, bool> seen;
  for (const TrainedModel& t : trained) {
    if (!seen.emplace(t.arch_id, true).second) continue;
    const auto pos = space.find(t.arch_id);
    if (!pos) throw LookupError("binary ranker: unknown arch '" + t.arch_id + "'");
    models.push_back({t.arch_id, space.graph(*pos), t.accuracy});
  }
  if (models.size() < 2) return;  // nothing to learn from yet
  const PairDataset data = build_pair_dataset(std::move(models), config_.accuracy_scale);
  TrainConfig tc = config_.train_config.value_or(
      accuracy_train_config(budget_k_, /*binary=*/true));
  tc.shape = config_.shape;
  tc.rng_seed = derive_seed(seed_, "binary-fit", static_cast<std::uint64_t>(fits_));
  bp_ = train_binary(bp_, data, tc, config_.train).predictor;
  ++fits_;
}

RankingResult BinaryRelationRanker::rank(const SearchSpaceIndex& space,
                                         std::span<const std::size_t> candidates) {
  // Embed each distinct encoding once.
  std::vector<std::size_t> local(space.unique_graphs().size(), SIZE_MAX);
  std::vector<const EncodedGraph*> graphs;
  std::vector<std::size_t> slot(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::size_t enc = space.encoding_of(candidates[k]);
    if (local[enc] == SIZE_MAX) {
      local[enc] = graphs.size();
      graphs.push_back(&space.unique_graphs()[enc]);
    }
    slot[k] = local[enc];
  }
  RankingResult result;
  if (candidates.empty()) return result;
  const RelationScores scores = relation_scores(bp_, embed(bp_.trunk, graphs));
  result = sort_by_comparator(candidates.size(), [&](std::size_t a, std::size_t b) {
    return scores.log_odds(slot[a], slot[b]) > 0.0;
  });
  for (std::size_t& o : result.order) o = candidates[o];
  return result;
}

RankingResult OracleRanker::rank(const SearchSpaceIndex& space,
                                 std::span<const std::size_t> candidates) {
  std::vector<double> acc(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k)
    acc[k] = query_accuracy(space.table(), space.arch_id(candidates[k]),
                            AccuracyMode::kFixedSeed, metric_);
  RankingResult result = sort_by_comparator(
      candidates.size(), [&](std::size_t a, std::size_t b) { return acc[a] > acc[b]; });
  for (std::size_t& o : result.order) o = candidates[o];
  return result;
}

// ---------------------------------------------------------------- config

void SearchConfig::validate() const {
  if (budget_k < 1) throw ConfigError("search: K must be >= 1");
  if (iterations < 1) throw ConfigError("search: I must be >= 1");
  if (budget_k % iterations != 0)
    throw ConfigError("search: K (" + std::to_string(budget_k) +
                      ") must be divisible by I (" + std::to_string(iterations) + ")");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("search: alpha must lie in [0, 1]");
  if (total_m < budget_k) throw ConfigError("search: M must be >= K");
  if (latency_limit_ms && !(*latency_limit_ms > 0.0))
    throw ConfigError("search: latency limit must be > 0");
}

std::vector<std::size_t> feasible_candidates(const SearchSpaceIndex& space,
                                             const SearchConfig& config) {
  std::vector<std::size_t> out;
  if (config.predicted_latency && config.predicted_latency->size() != space.size())
    throw DimensionError("search: predicted latency must cover the whole space");
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (config.latency_limit_ms) {
      const double lat = config.predicted_latency ? (*config.predicted_latency)[i]
                                                  : space.measured_latency(i);
      if (!(lat <= *config.latency_limit_ms)) continue;
    }
    out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------- shared loop

namespace {

void check_constraint_support(const SearchSpaceIndex& space, const SearchConfig& config) {
  if (config.latency_limit_ms && !space.has_latency())
    throw ConfigError("search: a latency limit needs a latency device");
}

// Queries accuracies, applies the measured-latency check and keeps the
// incumbent and trajectory.
class Recorder {
 public:
  Recorder(const SearchSpaceIndex& space, const SearchConfig& config,
           const SearchObserver& observer)
      : space_(space), config_(config), observer_(observer),
        accuracy_rng_(make_rng(config.rng_seed, "accuracy")) {}

  double train(std::size_t i, std::string phase) {
    TrainedModel t;
    t.step = static_cast<int>(result_.trained_set.size()) + 1;
    t.arch_id = space_.arch_id(i);
    t.accuracy = query_accuracy(space_.table(), t.arch_id, config_.accuracy_mode,
                                config_.accuracy_metric, &accuracy_rng_);
    if (space_.has_latency()) t.measured_latency_ms = space_.measured_latency(i);
    if (config_.predicted_latency) t.predicted_latency_ms = (*config_.predicted_latency)[i];
    t.feasible = !config_.latency_limit_ms ||
                 (t.measured_latency_ms && *t.measured_latency_ms <= *config_.latency_limit_ms);
    if (t.feasible && (result_.best_arch_id.empty() || t.accuracy > result_.best_accuracy)) {
      result_.best_arch_id = t.arch_id;
      result_.best_accuracy = t.accuracy;
    }
    t.incumbent = result_.best_accuracy;
    t.phase = std::move(phase);
    result_.trajectory.push_back({t.step, t.incumbent});
    result_.trained_set.push_back(t);
    if (observer_) observer_(result_.trained_set.back());
    return t.accuracy;
  }

  bool feasible_measured(std::size_t i) const {
    return !config_.latency_limit_ms || space_.measured_latency(i) <= *config_.latency_limit_ms;
  }

  int trained() const { return static_cast<int>(result_.trained_set.size()); }
  SearchResult& result() { return result_; }

 private:
  const SearchSpaceIndex& space_;
  const SearchConfig& config_;
  const SearchObserver& observer_;
  Rng accuracy_rng_;
  SearchResult result_;
};

}  // namespace

// ---------------------------------------------------------------- BRP

SearchResult brp_nas_search(const SearchSpaceIndex& space, const SearchConfig& config,
                            CandidateRanker* ranker, const SearchObserver& observer) {
  config.validate();
  check_constraint_support(space, config);
  std::unique_ptr<CandidateRanker> owned;
  if (ranker == nullptr) {
    owned = std::make_unique<BinaryRelationRanker>(BinaryRankerConfig{}, config.budget_k,
                                                   derive_seed(config.rng_seed, "ranker"));
    ranker = owned.get();
  }

  const std::vector<std::size_t> candidates = feasible_candidates(space, config);
  if (candidates.empty())
    throw InfeasibleError("search: no candidate satisfies the latency limit");

  Recorder rec(space, config, observer);
  Rng select_rng = make_rng(config.rng_seed, "select");
  std::vector<char> trained(space.size(), 0);
  std::vector<std::size_t> ordering = candidates;
  const int per_iter = config.budget_k / config.iterations;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    std::vector<std::size_t> selected;
    std::vector<char> chosen(space.size(), 0);
    auto take = [&](std::size_t i) {
      selected.push_back(i);
      chosen[i] = 1;
    };
    int n_top = 0;
    std::size_t stratum = ordering.size();
    if (iter > 1) {
      n_top = static_cast<int>(std::lround(config.alpha * per_iter));
      for (std::size_t i : ordering) {
        if (static_cast<int>(selected.size()) >= n_top) break;
        if (!trained[i]) take(i);
      }
      const double denom = std::ldexp(1.0, iter);
      stratum = std::max<std::size_t>(
          1, static_cast<std::size_t>(static_cast<double>(ordering.size()) / denom));
    }
    const int need = per_iter - static_cast<int>(selected.size());
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < stratum; ++k)
      if (!trained[ordering[k]] && !chosen[ordering[k]]) pool.push_back(ordering[k]);
    if (static_cast<int>(pool.size()) < need) {
      // Stratum exhausted: widen to every untrained candidate.
      pool.clear();
      for (std::size_t i : ordering)
        if (!trained[i] && !chosen[i]) pool.push_back(i);
    }
    std::shuffle(pool.begin(), pool.end(), select_rng);
    for (int k = 0; k < need && k < static_cast<int>(pool.size()); ++k) take(pool[k]);

    for (std::size_t i : selected) {
      trained[i] = 1;
      rec.train(i, "iteration-" + std::to_string(iter));
    }
    ranker->fit(space, rec.result().trained_set);
    RankingResult ranked = ranker->rank(space, candidates);
    rec.result().comparator_calls += ranked.comparisons;
    ordering = std::move(ranked.order);
  }

  const int remaining = config.total_m - config.budget_k;
  int examined = 0;
  for (std::size_t i : ordering) {
    if (examined >= remaining) break;
    if (trained[i]) continue;
    ++examined;
    // The latency check precedes training: infeasible candidates use a slot
    // but no training budget.
    if (!rec.feasible_measured(i)) {
      ++rec.result().final_phase_shortfall;
      continue;
    }
    trained[i] = 1;
    rec.train(i, "final");
  }
  rec.result().final_phase_shortfall += remaining - examined;
  return std::move(rec.result());
}

// ---------------------------------------------------------------- evolution

CellGraph mutate_nb201(const CellGraph& parent, Rng& rng) {
  if (parent.space != SearchSpace::kNb201 || parent.num_ops() != kNb201OpSlots)
    throw UnsupportedError("mutation is defined for NB-201 cells only");
  // Operation nodes 1..6 carry the edge labels O1..O6.
  std::vector<OpKind> ops = parent.ops;
  std::uniform_int_distribution<int> slot_dist(0, kNb201OpSlots - 1);
  std::uniform_int_distribution<int> op_dist(0, 3);
  const int slot = slot_dist(rng);
  const OpKind current = ops[static_cast<std::size_t>(slot)];
  std::vector<OpKind> others;
  for (OpKind op : kNb201Ops)
    if (op != current) others.push_back(op);
  ops[static_cast<std::size_t>(slot)] = others[static_cast<std::size_t>(op_dist(rng))];
  return make_nb201_cell(ops);
}

SearchResult aging_evolution(const SearchSpaceIndex& space, const SearchConfig& config,
                             const EvolutionConfig& evo, const SearchObserver& observer) {
  if (evo.pool_size < 1 || evo.sample_size < 1 || evo.sample_size > evo.pool_size)
    throw ConfigError("evolution: need 1 <= sample_size <= pool_size");
  if (config.total_m < 1) throw ConfigError("evolution: M must be >= 1");
  if (config.latency_limit_ms && !(*config.latency_limit_ms > 0.0))
    throw ConfigError("evolution: latency limit must be > 0");
  if (space.table().space() != SearchSpace::kNb201)
    throw UnsupportedError("evolution: mutation is defined for NB-201 only");
  check_constraint_support(space, config);

  Recorder rec(space, config, observer);
  Rng rng = make_rng(config.rng_seed, "evolution");
  std::map<std::size_t, double> cache;
  struct Member {
    std::size_t index;
    double accuracy;
  };
  std::vector<Member> pool;  // oldest first
  const long max_attempts =
      static_cast<long>(evo.max_attempts_factor) * config.total_m + evo.pool_size;
  long attempts = 0;

  auto evaluate = [&](std::size_t i, const char* phase) {
    if (evo.cached) {
      if (auto it = cache.find(i); it != cache.end()) return it->second;
    }
    const double acc = rec.train(i, phase);
    cache.emplace(i, acc);
    return acc;
  };

  std::uniform_int_distribution<std::size_t> any(0, space.size() - 1);
  while (static_cast<int>(pool.size()) < evo.pool_size && rec.trained() < config.total_m &&
         attempts++ < max_attempts) {
    const std::size_t i = any(rng);
    pool.push_back({i, evaluate(i, "init")});
  }

  std::vector<std::size_t> members(static_cast<std::size_t>(evo.pool_size));
  std::vector<std::size_t> sample(static_cast<std::size_t>(evo.sample_size));
  while (rec.trained() < config.total_m && attempts++ < max_attempts) {
    members.resize(pool.size());
    std::iota(members.begin(), members.end(), 0);
    sample.resize(std::min(pool.size(), static_cast<std::size_t>(evo.sample_size)));
    std::sample(members.begin(), members.end(), sample.begin(), sample.size(), rng);
    // std::sample keeps pool order, so the first maximum is the oldest.
    std::size_t parent = sample.front();
    for (std::size_t s : sample)
      if (pool[s].accuracy > pool[parent].accuracy) parent = s;
    const CellGraph child = mutate_nb201(space.cell(pool[parent].index), rng);
    const auto pos = space.find(child.arch_id);
    if (!pos) throw LookupError("evolution: table lacks '" + child.arch_id + "'");
    pool.push_back({*pos, evaluate(*pos, "evolve")});
    if (static_cast<int>(pool.size()) > evo.pool_size) pool.erase(pool.begin());
  }
  return std::move(rec.result());
}

SearchResult random_search(const SearchSpaceIndex& space, const SearchConfig& config,
                           const SearchObserver& observer) {
  if (config.total_m < 1) throw ConfigError("random search: M must be >= 1");
  if (config.latency_limit_ms && !(*config.latency_limit_ms > 0.0))
    throw ConfigError("random search: latency limit must be > 0");
  check_constraint_support(space, config);
  Recorder rec(space, config, observer);
  Rng rng = make_rng(config.rng_seed, "random-search");
  std::uniform_int_distribution<std::size_t> any(0, space.size() - 1);
  for (int k = 0; k < config.total_m; ++k) rec.train(any(rng), "random");
  return std::move(rec.result());
}

std::string to_jsonl(const SearchResult& result) {
  std::ostringstream out;
  for (const TrainedModel& t : result.trained_set) {
    nlohmann::ordered_json j;
    j["step"] = t.step;
    j["phase"] = t.phase;
    j["arch_id"] = t.arch_id;
    j["accuracy"] = t.accuracy;
    j["measured_latency_ms"] =
        t.measured_latency_ms ? nlohmann::ordered_json(*t.measured_latency_ms) : nullptr;
    j["predicted_latency_ms"] =
        t.predicted_latency_ms ? nlohmann::ordered_json(*t.predicted_latency_ms) : nullptr;
    j["feasible"] = t.feasible;
    j["incumbent"] = t.incumbent;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace hwnas
