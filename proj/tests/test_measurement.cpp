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
#include <cmath>
#include <vector>

#include "hwnas/errors.hpp"
#include "hwnas/gcn.hpp"
#include "hwnas/measurement.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace hwnas {
namespace {

std::vector<double> noisy_samples(Rng& rng, std::size_t n) {
  std::lognormal_distribution<double> body(0.0, 0.2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (double& s : out) s = 3.0 * body(rng) * (u(rng) < 0.05 ? 4.0 : 1.0);
  return out;
}

TEST(Aggregate, MatchesDefinitionalOracle) {
  Rng rng(1);
  std::uniform_int_distribution<std::size_t> len(10, 400);
  std::uniform_int_distribution<std::size_t> group(1, 12);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t g = group(rng);
    std::vector<double> s = noisy_samples(rng, std::max(g, len(rng)));
    const AggregatedLatency got = aggregate({s, g});
    const oracle::Aggregate want = oracle::aggregate(s, g);
    ASSERT_EQ(got.mean_ms, want.mean) << "trial " << t;
    ASSERT_EQ(got.kept_fraction, want.kept_fraction);
    ASSERT_EQ(got.warning, want.warning);
  }
}

TEST(Aggregate, ScaleEquivariant) {
  Rng rng(2);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s = noisy_samples(rng, 120);
    const double c = scale(rng);
    const double base = aggregate({s, 10}).mean_ms;
    for (double& v : s) v *= c;
    EXPECT_NEAR(aggregate({s, 10}).mean_ms, c * base, 1e-12 * c * base);
  }
}

TEST(Aggregate, ConstantSamples) {
  const AggregatedLatency a = aggregate({std::vector<double>(100, 5.0), 10});
  EXPECT_EQ(a.mean_ms, 5.0);
  EXPECT_EQ(a.kept_fraction, 1.0);
  EXPECT_EQ(a.n_groups, 10u);
  EXPECT_FALSE(a.warning);
}

TEST(Aggregate, DropsSingleOutlier) {
  std::vector<double> s(20, 1.0);
  s.insert(s.begin() + 7, 100.0);
  const AggregatedLatency a = aggregate({s, 10});
  EXPECT_EQ(a.mean_ms, 1.0);
  EXPECT_DOUBLE_EQ(a.kept_fraction, 20.0 / 21.0);
}

TEST(Aggregate, EmptyBandFallsBackWithWarning) {
  // Two values: the quartile band (3.25, 7.75) holds neither.
  const AggregatedLatency a = aggregate({{1.0, 10.0}, 1});
  EXPECT_TRUE(a.warning);
  EXPECT_EQ(a.mean_ms, oracle::aggregate({1.0, 10.0}, 1).mean);
}

TEST(Aggregate, GroupSizeOneIsOrderFree) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s = noisy_samples(rng, 97);
    const double a = aggregate({s, 1}).mean_ms;
    std::shuffle(s.begin(), s.end(), rng);
    EXPECT_NEAR(aggregate({s, 1}).mean_ms, a, 1e-12 * a);
  }
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate({{1.0, 2.0}, 10}), UsageError);
  EXPECT_THROW(aggregate({{1.0, 0.0, 2.0}, 1}), ValidationError);
  EXPECT_THROW(aggregate({{1.0, std::nan(""), 2.0}, 1}), ValidationError);
}

TEST(Timing, CountsRunsAndWarmup) {
  int calls = 0;
  const RawSamples r = time_callable([&] { ++calls; }, 30, 5, 10);
  EXPECT_EQ(calls, 35);
  EXPECT_EQ(r.samples.size(), 30u);
  EXPECT_EQ(r.group_size, 10u);
  for (double s : r.samples) EXPECT_GT(s, 0.0);
  EXPECT_THROW(time_callable([] {}, 0, 0), UsageError);
}

TEST(Timing, GcnInferenceSmoke) {
  Rng rng(4);
  const GcnModel m = make_gcn(GcnShape{}, rng);
  const EncodedGraph g = testing::random_encoded(rng);
  const RawSamples r = time_callable([&] { (void)forward(m, g); }, 40, 3);
  const AggregatedLatency a = aggregate(r);
  EXPECT_GT(a.mean_ms, 0.0);
  EXPECT_GT(a.kept_fraction, 0.0);
  EXPECT_LE(a.kept_fraction, 1.0);
}

TEST(SampleLog, RoundTrip) {
  testing::TempDir dir("log");
  SampleLog log;
  log[{"a", "cpu"}] = {1.5, 2.25, 3.0};
  log[{"b", "gpu"}] = {0.125};
  write_sample_log(dir / "s.csv", log);
  EXPECT_EQ(read_sample_log(dir / "s.csv"), log);
}

}  // namespace
}  // namespace hwnas
