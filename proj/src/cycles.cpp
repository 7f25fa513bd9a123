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

// Simple-cycle enumeration in the style of Johnson's algorithm, stopping
// once a count cap is reached.

#include <algorithm>
#include <vector>

#include "hwnas/analysis.hpp"
#include "hwnas/errors.hpp"

namespace hwnas {
namespace {

class CycleCounter {
 public:
  CycleCounter(const std::vector<std::vector<int>>& adjacency, std::int64_t cutoff)
      : adj_(adjacency),
        cutoff_(cutoff),
        allowed_(adjacency.size(), 0),
        blocked_(adjacency.size(), 0),
        block_map_(adjacency.size()) {}

  CycleProbeResult run() {
    const int n = static_cast<int>(adj_.size());
    for (int s = 0; s < n && !saturated(); ++s) {
      mark_component(s);
      for (int v = s; v < n; ++v) {
        blocked_[static_cast<std::size_t>(v)] = false;
        block_map_[static_cast<std::size_t>(v)].clear();
      }
      start_ = s;
      circuit(s);
    }
    return {count_, saturated()};
  }

 private:
  bool saturated() const { return count_ >= cutoff_; }

  // Restricts the search to the strongly connected component of s inside
  // the subgraph on vertices >= s: forward reach intersected with backward reach.
  void mark_component(int s) {
    const std::size_t n = adj_.size();
    std::vector<char> fwd(n, 0);
    std::vector<char> bwd(n, 0);
    std::vector<std::vector<int>> reverse(n);
    for (std::size_t v = static_cast<std::size_t>(s); v < n; ++v)
      for (int w : adj_[v])
        if (w >= s) reverse[static_cast<std::size_t>(w)].push_back(static_cast<int>(v));
    auto reach = [s](const std::vector<std::vector<int>>& g, std::vector<char>& seen) {
      std::vector<int> stack{s};
      seen[static_cast<std::size_t>(s)] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : g[static_cast<std::size_t>(v)])
          if (w >= s && !seen[static_cast<std::size_t>(w)]) {
            seen[static_cast<std::size_t>(w)] = 1;
            stack.push_back(w);
          }
      }
    };
    reach(adj_, fwd);
    reach(reverse, bwd);
    for (std::size_t v = 0; v < n; ++v) allowed_[v] = fwd[v] && bwd[v];
  }

  void unblock(int u) {
    std::vector<int> stack{u};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      auto& vb = blocked_[static_cast<std::size_t>(v)];
      if (!vb) continue;
      vb = false;
      auto& waiting = block_map_[static_cast<std::size_t>(v)];
      for (int w : waiting) stack.push_back(w);
      waiting.clear();
    }
  }

  bool circuit(int v) {
    bool found = false;
    blocked_[static_cast<std::size_t>(v)] = true;
    for (int w : adj_[static_cast<std::size_t>(v)]) {
      if (saturated()) return true;
      if (w < start_ || !allowed_[static_cast<std::size_t>(w)]) continue;
      if (w == start_) {
        ++count_;
        found = true;
      } else if (!blocked_[static_cast<std::size_t>(w)] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (int w : adj_[static_cast<std::size_t>(v)]) {
        if (w < start_ || !allowed_[static_cast<std::size_t>(w)]) continue;
        auto& waiting = block_map_[static_cast<std::size_t>(w)];
        if (std::find(waiting.begin(), waiting.end(), v) == waiting.end()) waiting.push_back(v);
      }
    }
    return found;
  }

  const std::vector<std::vector<int>>& adj_;
  std::int64_t cutoff_;
  std::int64_t count_ = 0;
  int start_ = 0;
  std::vector<char> allowed_;
  std::vector<char> blocked_;
  std::vector<std::vector<int>> block_map_;
};

}  // namespace

CycleProbeResult count_simple_cycles(const std::vector<std::vector<int>>& adjacency,
                                     std::int64_t cutoff) {
  if (cutoff <= 0) throw UsageError("cycle cutoff must be positive");
  const auto n = static_cast<int>(adjacency.size());
  for (const auto& row : adjacency)
    for (int w : row)
      if (w < 0 || w >= n) throw UsageError("adjacency list refers to a missing vertex");
  return CycleCounter(adjacency, cutoff).run();
}

CycleProbeResult cycle_probe(const RelationFn& relation, std::size_t n, std::int64_t cutoff) {
  std::vector<std::vector<int>> adjacency(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && relation(a, b) > 0.5) adjacency[a].push_back(static_cast<int>(b));
  return count_simple_cycles(adjacency, cutoff);
}

}  // namespace hwnas
