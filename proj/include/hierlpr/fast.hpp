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

// Block-level HierLPR.
//
// Per sample: every junction v (several children, all heading pure chains)
// has its child chains cut at their breaking points, k-way merged, and the
// result agglomerated with the upstream chain that ends at v. The subtree
// under the top of that upstream chain is then a pure chain carrying a
// descending block list. When no junction is left every tree is a chain;
// the per-tree block lists of all samples are k-way merged in one final pass.
//
// Cost is O(D n log K) for D junctions per sample; the final merge adds
// O(n log (M T)) for T trees per sample.

#include <algorithm>
#include <optional>
#include <vector>

#include "hierlpr/blocks.hpp"
#include "hierlpr/hierarchy.hpp"

namespace hierlpr {

struct TreeBlocks {
  LabelId root = kNoLabel;
  BlockList blocks;
};

// Descending block lists, one per tree of the given sample, in root-label order.
inline std::vector<TreeBlocks> fast_sample_blocks(const InstanceForest& forest, std::size_t sample,
                                                  TieRule rule = TieRule::canonical) {
  const LabelGraph& g = forest.graph();
  const std::size_t k = g.size();
  const auto& parent = forest.label_parents();

  // pure[l]: the current subtree under l is a chain. merged[l]: block list of
  // that chain when it came out of an agglomeration (else it is still raw).
  std::vector<char> pure(k, 0);
  std::vector<std::optional<BlockList>> merged(k);
  std::vector<std::size_t> impure_children(k, 0);

  auto raw_chain = [&](LabelId top) {
    std::vector<InstanceId> nodes;
    LabelId l = top;
    while (true) {
      nodes.push_back(forest.id(sample, l));
      auto kids = g.children(l);
      if (kids.empty()) break;
      l = kids.front();
    }
    return nodes;
  };
  auto chain_blocks = [&](LabelId top) {
    auto& m = merged[static_cast<std::size_t>(top)];
    if (m) return std::move(*m);
    return breaking_points(forest, raw_chain(top));
  };

  // Initial purity, children before parents.
  std::vector<LabelId> order;
  order.reserve(k);
  {
    std::vector<std::size_t> pending(k);
    for (std::size_t l = 0; l < k; ++l) {
      pending[l] = g.children(static_cast<LabelId>(l)).size();
      if (pending[l] == 0) order.push_back(static_cast<LabelId>(l));
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      LabelId p = parent[static_cast<std::size_t>(order[i])];
      if (p != kNoLabel && --pending[static_cast<std::size_t>(p)] == 0) order.push_back(p);
    }
  }
  for (LabelId l : order) {
    auto kids = g.children(l);
    pure[static_cast<std::size_t>(l)] =
        kids.empty() || (kids.size() == 1 && pure[static_cast<std::size_t>(kids.front())]);
    for (LabelId c : kids) {
      if (!pure[static_cast<std::size_t>(c)]) ++impure_children[static_cast<std::size_t>(l)];
    }
  }

  std::vector<LabelId> junctions;
  for (std::size_t l = 0; l < k; ++l) {
    if (g.children(static_cast<LabelId>(l)).size() >= 2 && impure_children[l] == 0) {
      junctions.push_back(static_cast<LabelId>(l));
    }
  }

  while (!junctions.empty()) {
    const LabelId v = junctions.back();
    junctions.pop_back();

    std::vector<BlockList> child_lists;
    for (LabelId c : g.children(v)) child_lists.push_back(chain_blocks(c));
    BlockList down = kway_merge(std::move(child_lists), rule);

    // Upstream chain C^(v): climb while the parent has v's branch as its only child.
    LabelId top = v;
    while (parent[static_cast<std::size_t>(top)] != kNoLabel &&
           g.children(parent[static_cast<std::size_t>(top)]).size() == 1) {
      top = parent[static_cast<std::size_t>(top)];
    }
    std::vector<InstanceId> up_nodes;
    for (LabelId l = v;; l = parent[static_cast<std::size_t>(l)]) {
      up_nodes.push_back(forest.id(sample, l));
      pure[static_cast<std::size_t>(l)] = 1;
      if (l == top) break;
    }
    std::reverse(up_nodes.begin(), up_nodes.end());

    merged[static_cast<std::size_t>(top)] =
        agglomerate(breaking_points(forest, up_nodes), std::move(down));

    const LabelId w = parent[static_cast<std::size_t>(top)];
    if (w != kNoLabel && --impure_children[static_cast<std::size_t>(w)] == 0) junctions.push_back(w);
  }

  std::vector<TreeBlocks> out;
  for (LabelId r : g.roots()) out.push_back({r, chain_blocks(r)});
  return out;
}

inline BlockList hier_lpr_fast_blocks(const InstanceForest& forest, TieRule rule = TieRule::canonical) {
  if (forest.graph().kind() != GraphKind::forest) throw NotAForestError("hier_lpr_fast needs a forest");
  std::vector<BlockList> lists;
  for (std::size_t s = 0; s < forest.samples(); ++s) {
    for (auto& t : fast_sample_blocks(forest, s, rule)) lists.push_back(std::move(t.blocks));
  }
  return kway_merge(std::move(lists), rule);
}

inline Ranking hier_lpr_fast(const InstanceForest& forest, TieRule rule = TieRule::canonical) {
  return ranking_from_blocks(forest, hier_lpr_fast_blocks(forest, rule), rule);
}

}  // namespace hierlpr
