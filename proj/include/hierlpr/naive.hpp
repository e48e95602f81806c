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

// Reference rankers: Chain-Merge and the bottom-up HierLPR loop built on it.
// Kept deliberately direct (prefix averages are rescanned after every
// removal), which costs O(K^3) per sample in the worst case.

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

#include "hierlpr/blocks.hpp"
#include "hierlpr/hierarchy.hpp"

namespace hierlpr {

namespace detail {

struct PrefixChoice {
  std::size_t length = 0;
  Mass mass;
};

// Longest prefix of nodes[from..] with the largest average.
inline PrefixChoice best_prefix(const InstanceForest& forest, std::span<const InstanceId> nodes,
                                std::size_t from) {
  PrefixChoice best;
  Mass run;
  for (std::size_t i = from; i < nodes.size(); ++i) {
    run += forest.mass(nodes[i]);
    if (best.length == 0 || compare_means(run, best.mass) >= 0) {
      best.length = i - from + 1;
      best.mass = run;
    }
  }
  return best;
}

}  // namespace detail

// Repeatedly removes the sub-chain prefix of maximal average LPR and appends
// it to the output. Each removed prefix is returned as one block.
inline BlockList chain_merge_blocks(const InstanceForest& forest,
                                    const std::vector<std::vector<InstanceId>>& chains,
                                    TieRule rule = TieRule::canonical) {
  if (chains.empty()) throw EmptyInputError("chain_merge needs at least one chain");
  std::vector<std::size_t> cursor(chains.size(), 0);
  std::vector<detail::PrefixChoice> best(chains.size());
  std::size_t remaining = 0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    remaining += chains[c].size();
    best[c] = detail::best_prefix(forest, chains[c], 0);
  }
  BlockList out;
  while (remaining > 0) {
    std::size_t pick = chains.size();
    for (std::size_t c = 0; c < chains.size(); ++c) {
      if (best[c].length == 0) continue;
      if (pick == chains.size() ||
          block_before(best[c].mass, chains[c][cursor[c]], best[pick].mass, chains[pick][cursor[pick]], rule)) {
        pick = c;
      }
    }
    const auto& nodes = chains[pick];
    const std::size_t from = cursor[pick];
    const std::size_t len = best[pick].length;
    out.push_back(detail::make_block(
        forest, std::span<const InstanceId>(nodes).subspan(from, len)));
    cursor[pick] += len;
    remaining -= len;
    best[pick] = detail::best_prefix(forest, nodes, cursor[pick]);
  }
  return out;
}

inline BlockList chain_merge_blocks(const InstanceForest& forest, const std::vector<ChainView>& chains,
                                    TieRule rule = TieRule::canonical) {
  std::vector<std::vector<InstanceId>> raw;
  raw.reserve(chains.size());
  for (const auto& c : chains) raw.push_back(c.nodes());
  return chain_merge_blocks(forest, raw, rule);
}

inline Ranking chain_merge(const InstanceForest& forest, const std::vector<ChainView>& chains,
                           TieRule rule = TieRule::canonical) {
  return ranking_from_blocks(forest, chain_merge_blocks(forest, chains, rule), rule);
}

// Bottom-up reference HierLPR. While some node has several children that all
// head pure chains, two of them (smallest ids first) are merged by
// Chain-Merge and replaced by the merged chain. The chains left at the roots
// are then merged globally.
inline Ranking hier_lpr_naive(const InstanceForest& forest, TieRule rule = TieRule::canonical) {
  if (forest.graph().kind() != GraphKind::forest) throw NotAForestError("hier_lpr_naive needs a forest");
  const std::size_t n = forest.size();
  const std::size_t k = forest.labels();

  // Working copy of the child lists; merged chains are rewired in place.
  std::vector<std::vector<InstanceId>> kids(n);
  for (InstanceId v = 0; v < n; ++v) kids[v] = forest.children(v);

  auto chain_from = [&](InstanceId r) {
    std::vector<InstanceId> nodes{r};
    while (!kids[nodes.back()].empty()) nodes.push_back(kids[nodes.back()].front());
    return nodes;
  };

  std::vector<signed char> pure(k);
  for (std::size_t s = 0; s < forest.samples(); ++s) {
    const InstanceId base = forest.id(s, 0);
    while (true) {
      // Recompute P for this sample. Labels are not topologically sorted, so
      // resolve purity with a memoised walk.
      std::fill(pure.begin(), pure.end(), -1);
      std::function<bool(InstanceId)> is_pure = [&](InstanceId v) -> bool {
        signed char& p = pure[v - base];
        if (p >= 0) return p != 0;
        const auto& ks = kids[v];
        p = (ks.empty() || (ks.size() == 1 && is_pure(ks.front()))) ? 1 : 0;
        return p != 0;
      };
      InstanceId junction = kNoInstance;
      for (std::size_t l = 0; l < k && junction == kNoInstance; ++l) {
        const InstanceId v = base + static_cast<InstanceId>(l);
        if (kids[v].size() < 2) continue;
        if (std::all_of(kids[v].begin(), kids[v].end(), is_pure)) junction = v;
      }
      if (junction == kNoInstance) break;

      auto& ks = kids[junction];
      const InstanceId r1 = ks[0];
      const InstanceId r2 = ks[1];
      BlockList merged = chain_merge_blocks(forest, {chain_from(r1), chain_from(r2)}, rule);
      std::vector<InstanceId> seq;
      for (const auto& b : merged) seq.insert(seq.end(), b.members.begin(), b.members.end());
      ks.erase(ks.begin(), ks.begin() + 2);
      ks.insert(std::lower_bound(ks.begin(), ks.end(), seq.front()), seq.front());
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) kids[seq[i]] = {seq[i + 1]};
      kids[seq.back()].clear();
    }
  }

  std::vector<std::vector<InstanceId>> roots;
  for (InstanceId v = 0; v < n; ++v) {
    if (forest.parent(v) == kNoInstance) roots.push_back(chain_from(v));
  }
  if (roots.empty()) {
    Ranking r;
    r.tie_rule = rule;
    r.finish(0);
    return r;
  }
  return ranking_from_blocks(forest, chain_merge_blocks(forest, roots, rule), rule);
}

}  // namespace hierlpr
