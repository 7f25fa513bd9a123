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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "hwnas/benchmark_store.hpp"
#include "hwnas/errors.hpp"
#include "hwnas/search.hpp"
#include "test_support.hpp"

namespace hwnas {
namespace {

constexpr const char* kDevice = "desktop_cpu";

class FullSpace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    table_ = std::make_unique<BenchmarkTable>(
        synth_table(default_synthetic_spec(0), SearchSpace::kNb201));
    space_ = std::make_unique<SearchSpaceIndex>(*table_, kDevice);
  }
  static void TearDownTestSuite() {
    space_.reset();
    table_.reset();
  }
  static const SearchSpaceIndex& space() { return *space_; }

  // Median measured latency: roughly half the space is feasible.
  static double median_latency() {
    std::vector<double> lat;
    for (std::size_t i = 0; i < space().size(); ++i) lat.push_back(space().measured_latency(i));
    std::nth_element(lat.begin(), lat.begin() + lat.size() / 2, lat.end());
    return lat[lat.size() / 2];
  }

 private:
  static inline std::unique_ptr<BenchmarkTable> table_;
  static inline std::unique_ptr<SearchSpaceIndex> space_;
};

// 100 distinct cells; enough for selection statistics without a full table.
class SmallSpace : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<CellGraph> cells;
    for (int i = 0; i < 100; ++i) cells.push_back(nb201_cell_from_index(i * 151 + 7));
    table_ = std::make_unique<BenchmarkTable>(synth_table(default_synthetic_spec(3), cells));
    space_ = std::make_unique<SearchSpaceIndex>(*table_, kDevice);
  }
  const SearchSpaceIndex& space() const { return *space_; }

 private:
  std::unique_ptr<BenchmarkTable> table_;
  std::unique_ptr<SearchSpaceIndex> space_;
};

TEST(SearchConfig, Validation) {
  SearchConfig c;
  EXPECT_NO_THROW(c.validate());
  c.budget_k = 101;
  c.total_m = 200;
  EXPECT_THROW(c.validate(), ConfigError);  // K not divisible by I
  c = SearchConfig{};
  c.total_m = 50;
  EXPECT_THROW(c.validate(), ConfigError);  // M < K
  c = SearchConfig{};
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SearchConfig{};
  c.latency_limit_ms = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST_F(FullSpace, RandomSearchFirstDrawIsUniform) {
  const int runs = 10000;
  const int bins = 25;
  std::vector<int> counts(bins, 0);
  SearchConfig c;
  c.total_m = 1;
  for (int r = 0; r < runs; ++r) {
    c.rng_seed = static_cast<std::uint64_t>(r);
    const SearchResult res = random_search(space(), c);
    ASSERT_EQ(res.trained_set.size(), 1u);
    const std::size_t pos = *space().find(res.trained_set.front().arch_id);
    ++counts[pos * bins / space().size()];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(runs) / bins;
  for (int n : counts) chi2 += (n - expected) * (n - expected) / expected;
  EXPECT_LT(chi2, 42.98);  // 24 dof, alpha 0.01
}

void check_trajectory(const SearchResult& r, std::optional<double> limit) {
  ASSERT_EQ(r.trajectory.size(), r.trained_set.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    EXPECT_EQ(r.trajectory[k].trained, static_cast<int>(k) + 1);
    EXPECT_GE(r.trajectory[k].incumbent, prev);
    prev = r.trajectory[k].incumbent;
  }
  if (!r.best_arch_id.empty() && limit) {
    const auto it = std::find_if(r.trained_set.begin(), r.trained_set.end(),
                                 [&](const TrainedModel& t) { return t.arch_id == r.best_arch_id; });
    ASSERT_NE(it, r.trained_set.end());
    EXPECT_LE(*it->measured_latency_ms, *limit);
  }
}

TEST_F(FullSpace, ConstrainedSearchesRespectTheLimit) {
  SearchConfig c;
  c.latency_limit_ms = median_latency();
  c.total_m = 150;
  c.rng_seed = 4;
  check_trajectory(random_search(space(), c), c.latency_limit_ms);
  check_trajectory(aging_evolution(space(), c, {}), c.latency_limit_ms);
  check_trajectory(aging_evolution(space(), c, {.cached = true}), c.latency_limit_ms);
  OracleRanker oracle;
  check_trajectory(brp_nas_search(space(), c, &oracle), c.latency_limit_ms);
}

TEST_F(FullSpace, SameSeedSameRun) {
  SearchConfig c;
  c.total_m = 120;
  c.rng_seed = 11;
  EXPECT_EQ(to_jsonl(random_search(space(), c)), to_jsonl(random_search(space(), c)));
  EXPECT_EQ(to_jsonl(aging_evolution(space(), c, {})), to_jsonl(aging_evolution(space(), c, {})));
  OracleRanker oracle;
  EXPECT_EQ(to_jsonl(brp_nas_search(space(), c, &oracle)),
            to_jsonl(brp_nas_search(space(), c, &oracle)));
  SearchConfig d = c;
  d.rng_seed = 12;
  EXPECT_NE(to_jsonl(random_search(space(), c)), to_jsonl(random_search(space(), d)));
}

TEST_F(FullSpace, BrpWithPerfectRankerFindsBestFeasible) {
  for (double quantile_limit : {0.0, 1.0}) {
    SearchConfig c;
    c.rng_seed = 5;
    if (quantile_limit == 0.0) c.latency_limit_ms = median_latency();
    // Brute-force argmax over the feasible set.
    double best = -1.0;
    for (std::size_t i = 0; i < space().size(); ++i) {
      if (c.latency_limit_ms && space().measured_latency(i) > *c.latency_limit_ms) continue;
      best = std::max(best, query_accuracy(space().table(), space().arch_id(i),
                                           AccuracyMode::kFixedSeed));
    }
    OracleRanker oracle;
    const SearchResult r = brp_nas_search(space(), c, &oracle);
    EXPECT_EQ(r.best_accuracy, best);
    EXPECT_EQ(static_cast<int>(r.trained_set.size()), c.total_m);
    EXPECT_EQ(r.final_phase_shortfall, 0);
    EXPECT_GT(r.comparator_calls, 0);
  }
}

TEST_F(FullSpace, InfeasibleLimit) {
  SearchConfig c;
  c.latency_limit_ms = 1e-6;
  OracleRanker oracle;
  EXPECT_THROW(brp_nas_search(space(), c, &oracle), InfeasibleError);
  const SearchResult r = random_search(space(), c);
  EXPECT_TRUE(r.best_arch_id.empty());
  EXPECT_EQ(r.best_accuracy, 0.0);
}

TEST_F(FullSpace, CachedEvolutionNeverRetrains) {
  SearchConfig c;
  c.total_m = 300;
  c.rng_seed = 8;
  const SearchResult r = aging_evolution(space(), c, {.cached = true});
  std::set<std::string> ids;
  for (const auto& t : r.trained_set) EXPECT_TRUE(ids.insert(t.arch_id).second);
  EXPECT_EQ(static_cast<int>(r.trained_set.size()), c.total_m);
  const SearchResult plain = aging_evolution(space(), c, {});
  EXPECT_EQ(static_cast<int>(plain.trained_set.size()), c.total_m);
  EXPECT_THROW(aging_evolution(space(), c, {.pool_size = 4, .sample_size = 5}), ConfigError);
}

TEST(Mutation, ChangesExactlyOneSlot) {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const CellGraph parent = testing::random_cell(rng);
    const CellGraph child = mutate_nb201(parent, rng);
    int diff = 0;
    for (int k = 0; k < kNb201OpSlots; ++k) diff += parent.ops[k] != child.ops[k];
    EXPECT_EQ(diff, 1);
  }
}

TEST_F(SmallSpace, SingleIterationWithNoFinalPhaseIsUniform) {
  SearchConfig c;
  c.budget_k = 10;
  c.iterations = 1;
  c.total_m = 10;
  std::vector<int> counts(space().size(), 0);
  const int runs = 2000;
  OracleRanker oracle;
  for (int r = 0; r < runs; ++r) {
    c.rng_seed = static_cast<std::uint64_t>(r);
    const SearchResult res = brp_nas_search(space(), c, &oracle);
    ASSERT_EQ(res.trained_set.size(), 10u);
    std::set<std::string> ids;
    for (const auto& t : res.trained_set) {
      EXPECT_EQ(t.phase, "iteration-1");
      ids.insert(t.arch_id);
      ++counts[*space().find(t.arch_id)];
    }
    EXPECT_EQ(ids.size(), 10u);
  }
  const double expected = runs * 10.0 / static_cast<double>(space().size());
  double chi2 = 0.0;
  for (int n : counts) chi2 += (n - expected) * (n - expected) / expected;
  EXPECT_LT(chi2, 134.6);  // 99 dof, alpha 0.01
}

TEST_F(SmallSpace, BinaryRankerRunsEndToEnd) {
  BinaryRankerConfig rc;
  rc.shape = testing::small_shape(0);
  TrainConfig tc = accuracy_train_config(20, true);
  tc.shape = rc.shape;
  tc.max_epochs = 5;
  tc.early_stop_patience = 4;
  rc.train_config = tc;
  SearchConfig c;
  c.budget_k = 20;
  c.iterations = 2;
  c.total_m = 30;
  c.rng_seed = 2;
  BinaryRelationRanker ranker(rc, c.budget_k, 9);
  const SearchResult r = brp_nas_search(space(), c, &ranker);
  EXPECT_EQ(ranker.fits(), 2);
  EXPECT_EQ(r.trained_set.size(), 30u);
  std::set<std::string> ids;
  for (const auto& t : r.trained_set) EXPECT_TRUE(ids.insert(t.arch_id).second);
  check_trajectory(r, std::nullopt);
}

}  // namespace
}  // namespace hwnas
