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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hwnas/analysis.hpp"
#include "hwnas/benchmark_store.hpp"
#include "hwnas/errors.hpp"
#include "test_support.hpp"

namespace hwnas {
namespace {

const std::string kAllZero = "|none~0|+|none~0|none~1|+|none~0|none~1|none~2|";

BenchmarkTable one_entry_table() {
  BenchmarkTable t(SearchSpace::kNb201, {"cpu"});
  BenchmarkEntry e;
  e.arch_id = kAllZero;
  e.val_accuracy = {90.0, 91.0};
  e.test_accuracy = {89.5, 90.5};
  e.latency_ms = {{"cpu", 5.0}};
  e.flops = 10;
  e.params = 2;
  t.insert(e);
  t.finalize();
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class SyntheticTable : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    table_ = new BenchmarkTable(synth_table(default_synthetic_spec(0), SearchSpace::kNb201));
  }
  static void TearDownTestSuite() {
    delete table_;
    table_ = nullptr;
  }
  static const BenchmarkTable& table() { return *table_; }

 private:
  static inline BenchmarkTable* table_ = nullptr;
};

TEST(BenchmarkStore, QueryModes) {
  const BenchmarkTable t = one_entry_table();
  EXPECT_DOUBLE_EQ(query_accuracy(t, kAllZero, AccuracyMode::kMean), 90.5);
  EXPECT_EQ(query_accuracy(t, kAllZero, AccuracyMode::kFixedSeed), 90.0);
  EXPECT_EQ(query_accuracy(t, kAllZero, AccuracyMode::kFixedSeed, AccuracyMetric::kTest), 89.5);
  EXPECT_EQ(query_latency(t, kAllZero, "cpu"), 5.0);
  EXPECT_THROW(query_latency(t, kAllZero, "gpu"), LookupError);
  EXPECT_THROW(query_accuracy(t, "missing", AccuracyMode::kMean), LookupError);
  EXPECT_TRUE(t.partial());
}

TEST(BenchmarkStore, RandomSeedModeIsUniform) {
  BenchmarkTable t(SearchSpace::kNb201, {"cpu"});
  BenchmarkEntry e;
  e.arch_id = kAllZero;
  e.val_accuracy = {10.0, 20.0, 30.0, 40.0};
  e.test_accuracy = e.val_accuracy;
  e.latency_ms = {{"cpu", 1.0}};
  t.insert(e);
  Rng rng(3);
  std::vector<int> counts(4, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const double v = query_accuracy(t, kAllZero, AccuracyMode::kRandomSeed,
                                    AccuracyMetric::kValidation, &rng);
    ++counts[static_cast<int>(v / 10.0) - 1];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 4.0) * (c - draws / 4.0) / (draws / 4.0);
  EXPECT_LT(chi2, 11.345);  // chi-square, 3 dof, alpha 0.01
}

TEST(BenchmarkStore, OneEntryRoundTripIsByteIdentical) {
  testing::TempDir dir("store");
  const BenchmarkTable t = one_entry_table();
  save_table(t, dir / "a.csv");
  const BenchmarkTable back = load_table(dir / "a.csv");
  EXPECT_EQ(back, t);
  save_table(back, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(BenchmarkStore, RejectsZeroLatencyWithRowNumber) {
  testing::TempDir dir("store");
  const BenchmarkTable t = one_entry_table();
  save_table(t, dir / "a.csv");
  std::string text = slurp(dir / "a.csv");
  const auto pos = text.find(",5,");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 3, ",0,");
  std::ofstream(dir / "a.csv", std::ios::binary) << text;
  try {
    load_table(dir / "a.csv");
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.row(), 2);
  }
}

TEST(BenchmarkStore, RejectsDuplicateIds) {
  BenchmarkTable t = one_entry_table();
  BenchmarkEntry e = t.at(kAllZero);
  EXPECT_THROW(t.insert(e), UsageError);
}

TEST_F(SyntheticTable, FullCoverageAndDeterminism) {
  EXPECT_EQ(table().size(), 15625u);
  EXPECT_FALSE(table().partial());
  EXPECT_EQ(synth_table(default_synthetic_spec(0), SearchSpace::kNb201), table());
  EXPECT_FALSE(synth_table(default_synthetic_spec(1), SearchSpace::kNb201) == table());
}

TEST_F(SyntheticTable, SaveLoadFixpoint) {
  testing::TempDir dir("store");
  save_table(table(), dir / "t.csv");
  const BenchmarkTable back = load_table(dir / "t.csv");
  EXPECT_EQ(back, table());
  save_table(back, dir / "u.csv");
  EXPECT_EQ(slurp(dir / "t.csv"), slurp(dir / "u.csv"));
  for (const auto& [id, e] : table().entries())
    for (const auto& [dev, lat] : e.latency_ms)
      ASSERT_NEAR(query_latency(back, id, dev), lat, 1e-9 * lat);
}

TEST_F(SyntheticTable, AllZeroCellCostsOnlyOverhead) {
  const BenchmarkEntry& e = table().at(kAllZero);
  for (const DeviceProfile& d : default_device_profiles())
    EXPECT_DOUBLE_EQ(e.latency_ms.at(d.name), d.overhead_ms);
}

TEST_F(SyntheticTable, FlopsLatencyCorrelationIsImperfect) {
  for (const std::string& device : table().devices()) {
    std::vector<double> flops;
    std::vector<double> lat;
    for (const auto& [id, e] : table().entries()) {
      flops.push_back(e.flops);
      lat.push_back(e.latency_ms.at(device));
    }
    const double rho = spearman(flops, lat);
    EXPECT_GT(rho, 0.3) << device;
    EXPECT_LT(rho, 0.9) << device;
  }
}

TEST(BenchmarkStore, ZeroNoiseGivesIdenticalSeeds) {
  SyntheticSpec spec = default_synthetic_spec(4);
  spec.noise_sd = 0.0;
  Rng rng(1);
  std::vector<CellGraph> cells;
  for (int i = 0; i < 50; ++i) {
    CellGraph c = testing::random_cell(rng);
    if (std::none_of(cells.begin(), cells.end(),
                     [&](const CellGraph& x) { return x.arch_id == c.arch_id; }))
      cells.push_back(c);
  }
  const BenchmarkTable t = synth_table(spec, cells);
  for (const auto& [id, e] : t.entries()) {
    for (double v : e.val_accuracy) EXPECT_EQ(v, e.val_accuracy.front());
    for (double v : e.val_accuracy) EXPECT_TRUE(v >= 0.0 && v <= 100.0);
  }
}

TEST(BenchmarkStore, RemovingAnOpNeverIncreasesLatency) {
  Rng rng(8);
  for (const DeviceProfile& profile : default_device_profiles()) {
    for (int t = 0; t < 300; ++t) {
      auto ops = testing::random_ops(rng);
      const double before = synthetic_latency(make_nb201_cell(ops), profile);
      std::uniform_int_distribution<int> slot(0, 5);
      ops[static_cast<std::size_t>(slot(rng))] = OpKind::kZero;
      EXPECT_LE(synthetic_latency(make_nb201_cell(ops), profile), before + 1e-12);
    }
  }
}

TEST(BenchmarkStore, SpecValidation) {
  SyntheticSpec spec = default_synthetic_spec(0);
  spec.noise_sd = -1.0;
  EXPECT_THROW(validate(spec), ValidationError);
  spec = default_synthetic_spec(0);
  spec.devices.front().parallelism = 1.5;
  EXPECT_THROW(validate(spec), ValidationError);
}

TEST(BenchmarkStore, MappedIngestion) {
  testing::TempDir dir("store");
  std::ofstream(dir / "ext.csv") << "arch,acc_a,acc_b,lat_us,fl,pa\n"
                                 << kAllZero << ",90,92,5000,1,2\n";
  const TableMapping mapping = parse_table_mapping(R"({
    "space": "nb201", "arch_id": "arch",
    "val_accuracy": ["acc_a", "acc_b"], "test_accuracy": ["acc_b"],
    "latency": {"cpu": "lat_us"}, "latency_scale": 0.001,
    "flops": "fl", "params": "pa"})");
  const BenchmarkTable t = load_table_mapped(dir / "ext.csv", mapping);
  EXPECT_DOUBLE_EQ(query_latency(t, kAllZero, "cpu"), 5.0);
  EXPECT_DOUBLE_EQ(query_accuracy(t, kAllZero, AccuracyMode::kMean), 91.0);
}

}  // namespace
}  // namespace hwnas
