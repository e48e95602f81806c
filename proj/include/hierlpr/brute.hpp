// Copyright 2026 The hierlpr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Exhaustive eAUC maximisation over all linear extensions. Oracle only.

#include <vector>

#include "hierlpr/blocks.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/metrics.hpp"

namespace hierlpr {

inline constexpr std::size_t kDefaultBruteCap = 5'000'000;

struct BruteForceResult {
  Ranking ranking;
  double eauc = 0.0;
  Fixed eauc_exact = 0;
  std::size_t orderings = 0;
};

// Among optimal orderings the lexicographically smallest one (by instance id)
// wins, since enumeration is lexicographic and only strict gains replace it.
inline BruteForceResult brute_force_optimal(const InstanceForest& forest, std::size_t cap = kDefaultBruteCap) {
  BruteForceResult res;
  std::vector<InstanceId> best;
  bool have = false;
  res.orderings = for_each_topological_ordering(forest, cap, [&](std::span<const InstanceId> o) {
    const Fixed e = eauc_exact(forest, o);
    if (!have || e > res.eauc_exact) {
      res.eauc_exact = e;
      best.assign(o.begin(), o.end());
      have = true;
    }
  });
  res.ranking = ranking_from_blocks(forest, breaking_points(forest, best));
  res.eauc = eauc(forest, best);
  return res;
}

}  // namespace hierlpr
