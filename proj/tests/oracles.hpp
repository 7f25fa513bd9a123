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

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. They follow the written definitions directly and share
// no code with the library.

#ifndef HWNAS_TESTS_ORACLES_HPP_
#define HWNAS_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <sstream>
#include <utility>
#include <string>
#include <vector>

namespace hwnas::oracle {

// Linear interpolation between order statistics at position (n - 1) p.
inline double type7(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const double fl = std::floor(h);
  const auto j = static_cast<std::size_t>(fl);
  if (j + 1 >= xs.size()) return xs.back();
  return xs[j] + (h - fl) * (xs[j + 1] - xs[j]);
}

struct Aggregate {
  double mean = 0.0;
  double kept_fraction = 0.0;
  bool warning = false;
};

// Trimmed, grouped mean: keep samples within the inclusive quartile band,
// average consecutive groups, keep group means within their own band, average.
inline Aggregate aggregate(const std::vector<double>& samples, std::size_t group) {
  Aggregate out;
  const double q1 = type7(samples, 0.25);
  const double q3 = type7(samples, 0.75);
  std::vector<double> kept;
  for (double s : samples)
    if (q1 <= s && s <= q3) kept.push_back(s);
  if (kept.empty()) {
    kept = samples;
    out.warning = true;
  }
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  for (std::size_t g = 0; g * group < kept.size(); ++g) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = g * group; k < kept.size() && k < (g + 1) * group; ++k) {
      sum += kept[k];
      ++n;
    }
    means.push_back(sum / static_cast<double>(n));
    sizes.push_back(n);
  }
  const double g1 = type7(means, 0.25);
  const double g3 = type7(means, 0.75);
  std::vector<std::size_t> chosen;
  for (std::size_t g = 0; g < means.size(); ++g)
    if (g1 <= means[g] && means[g] <= g3) chosen.push_back(g);
  if (chosen.empty()) {
    for (std::size_t g = 0; g < means.size(); ++g) chosen.push_back(g);
    out.warning = true;
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t g : chosen) {
    total += means[g];
    used += sizes[g];
  }
  out.mean = total / static_cast<double>(chosen.size());
  out.kept_fraction = static_cast<double>(used) / static_cast<double>(samples.size());
  return out;
}

// Pearson correlation of midranks, computed by counting.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double less = 0.0;
      double equal = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) less += 1.0;
        if (v[j] == v[i]) equal += 1.0;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const std::vector<double> rx = ranks(xs);
  const std::vector<double> ry = ranks(ys);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct Point {
  std::string id;
  double accuracy = 0.0;
  double latency = 0.0;
};

// O(n^2) non-dominated filter; returns ids in input order.
inline std::vector<std::string> pareto_ids(const std::vector<Point>& pts) {
  std::vector<std::string> out;
  for (const Point& p : pts) {
    bool dominated = false;
    for (const Point& q : pts) {
      if (q.accuracy >= p.accuracy && q.latency <= p.latency &&
          (q.accuracy > p.accuracy || q.latency < p.latency)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(p.id);
  }
  return out;
}

// ---------------------------------------------------------------- cells

using OpSequence = std::vector<std::string>;

// Edge labels of an architecture string read by plain splitting. Label k
// sits on the edge (source, target) = kCellEdges[k].
inline std::vector<std::string> edge_labels(const std::string& arch) {
  std::vector<std::string> labels;
  std::stringstream ss(arch);
  for (std::string tok; std::getline(ss, tok, '|');) {
    if (tok.empty() || tok == "+") continue;
    labels.push_back(tok.substr(0, tok.find('~')));
  }
  return labels;
}

inline constexpr std::pair<int, int> kCellEdges[] = {{0, 1}, {0, 2}, {1, 2},
                                                     {0, 3}, {1, 3}, {2, 3}};

// Interprets the edge-labeled cell as a sum over input->output paths, each a
// composition of its edge ops: zero edges kill the path and skip edges are
// the identity. Returns the set of surviving op sequences.
inline std::set<OpSequence> interpreter_paths(const std::string& arch) {
  const std::vector<std::string> labels = edge_labels(arch);
  std::set<OpSequence> out;
  OpSequence current;
  auto walk = [&](auto&& self, int node, bool alive) -> void {
    if (node == 3) {
      if (alive) out.insert(current);
      return;
    }
    for (std::size_t e = 0; e < 6; ++e) {
      if (kCellEdges[e].first != node) continue;
      const std::string& op = labels[e];
      const bool pushed = op != "none" && op != "skip_connect";
      if (pushed) current.push_back(op);
      self(self, kCellEdges[e].second, alive && op != "none");
      if (pushed) current.pop_back();
    }
  };
  walk(walk, 0, true);
  return out;
}

// Paths read back from dense encoded matrices: data edges only (no
// self-loops, nothing through the last, global node), labels taken from the
// one-hot columns 0..2 (conv1x1, conv3x3, pool).
template <typename Matrix>
std::set<OpSequence> matrix_paths(const Matrix& adjacency, const Matrix& features) {
  const int n = static_cast<int>(adjacency.rows());
  const int output = n - 2;
  const int global = n - 1;
  const char* names[] = {"nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};
  std::set<OpSequence> out;
  OpSequence current;
  auto walk = [&](auto&& self, int node) -> void {
    if (node == output) {
      out.insert(current);
      return;
    }
    for (int next = 0; next < global; ++next) {
      if (next == node || adjacency(node, next) == 0.0) continue;
      if (next == output) {
        self(self, next);
        continue;
      }
      int label = -1;
      for (int c = 0; c < 3; ++c)
        if (features(next, c) == 1.0) label = c;
      if (label < 0) continue;
      current.emplace_back(names[label]);
      self(self, next);
      current.pop_back();
    }
  };
  walk(walk, 0);
  return out;
}

}  // namespace hwnas::oracle

#endif  // HWNAS_TESTS_ORACLES_HPP_
