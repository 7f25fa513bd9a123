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

#include <vector>

#include "hwnas/errors.hpp"
#include "hwnas/predictors.hpp"

namespace hwnas {

RankingResult sort_by_comparator(
    std::size_t n, const std::function<bool(std::size_t, std::size_t)>& before) {
  RankingResult result;
  std::vector<std::size_t> current(n);
  for (std::size_t i = 0; i < n; ++i) current[i] = i;
  std::vector<std::size_t> scratch(n);
  // Bottom-up merge sort. An element from the right run moves ahead only when
  // the comparator strictly prefers it, which keeps ties in input order.
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(n, lo + width);
      const std::size_t hi = std::min(n, lo + 2 * width);
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        ++result.comparisons;
        if (before(current[j], current[i]))
          scratch[k++] = current[j++];
        else
          scratch[k++] = current[i++];
      }
      while (i < mid) scratch[k++] = current[i++];
      while (j < hi) scratch[k++] = current[j++];
    }
    current.swap(scratch);
  }
  result.order = std::move(current);
  return result;
}

RankingResult rank_candidates(const BinaryPredictor& bp,
                              const Eigen::MatrixXd& embeddings) {
  const RelationScores scores = relation_scores(bp, embeddings);
  return sort_by_comparator(static_cast<std::size_t>(embeddings.rows()),
                            [&scores](std::size_t a, std::size_t b) {
                              return scores.log_odds(a, b) > 0.0;
                            });
}

RankingResult rank_candidates(const BinaryPredictor& bp,
                              std::span<const EncodedGraph* const> candidates) {
  if (candidates.empty()) return {};
  return rank_candidates(bp, embed(bp.trunk, candidates));
}

}  // namespace hwnas
