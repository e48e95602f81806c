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

// Tree-like DAGs: keep one parent per multi-parent label, rank every such
// forest and keep the split with the largest eAUC.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/fast.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/metrics.hpp"
#include "hierlpr/ranker.hpp"

namespace hierlpr {

inline constexpr std::size_t kDefaultSplitCap = 4096;

namespace detail {

// Product of parent counts over `labels`, or cap + 1 once it passes cap.
inline std::size_t split_count(const LabelGraph& g, std::span<const LabelId> labels, std::size_t cap) {
  std::size_t n = 1;
  for (LabelId l : labels) {
    const std::size_t p = g.parents(l).size();
    if (n > cap / p) return cap + 1;
    n *= p;
  }
  return n;
}

}  // namespace detail

// Assignments are vectors of parent indices, one per multi-parent label (in
// label order), enumerated lexicographically with the last label fastest.
class SplitEnumeration {
 public:
  SplitEnumeration(std::shared_ptr<const LabelGraph> graph, std::size_t cap) : graph_(std::move(graph)) {
    labels_ = graph_->multi_parent_labels();
    count_ = detail::split_count(*graph_, labels_, cap);
    if (count_ > cap) {
      throw SplitCapExceededError(std::to_string(labels_.size()) + " multi-parent labels give more than " +
                                  std::to_string(cap) + " splits");
    }
  }

  const std::vector<LabelId>& multi_parent_labels() const { return labels_; }
  std::size_t count() const { return count_; }
  const LabelGraph& graph() const { return *graph_; }

  // The index-th assignment in enumeration order.
  std::vector<std::size_t> assignment(std::size_t index) const {
    std::vector<std::size_t> a(labels_.size());
    for (std::size_t i = labels_.size(); i-- > 0;) {
      const std::size_t p = graph_->parents(labels_[i]).size();
      a[i] = index % p;
      index /= p;
    }
    return a;
  }

  std::shared_ptr<const LabelGraph> split(std::span<const std::size_t> assignment) const {
    return split_graph(*graph_, labels_, assignment);
  }

  // Forest keeping parents(labels[i])[assignment[i]] for each multi-parent label.
  static std::shared_ptr<const LabelGraph> split_graph(const LabelGraph& g, std::span<const LabelId> labels,
                                                       std::span<const std::size_t> assignment) {
    std::vector<Edge> edges;
    std::vector<std::size_t> slot(g.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < labels.size(); ++i) slot[static_cast<std::size_t>(labels[i])] = i;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const auto ps = g.parents(static_cast<LabelId>(c));
      if (ps.empty()) continue;
      const std::size_t pick = slot[c] == static_cast<std::size_t>(-1) ? 0 : assignment[slot[c]];
      edges.emplace_back(static_cast<LabelId>(c), ps[pick]);
    }
    return std::make_shared<const LabelGraph>(g.labels(), std::move(edges));
  }

 private:
  std::shared_ptr<const LabelGraph> graph_;
  std::vector<LabelId> labels_;
  std::size_t count_ = 1;
};

inline SplitEnumeration enumerate_splits(std::shared_ptr<const LabelGraph> graph, std::size_t cap = kDefaultSplitCap) {
  return SplitEnumeration(std::move(graph), cap);
}

struct AndViolation {
  InstanceId node = kNoInstance;
  InstanceId parent = kNoInstance;  // an original parent ranked after the node
};

enum class SplitSearch {
  exhaustive,     // every whole-graph split; exact maximum
  per_component,  // each component's split chosen on its own instances
};

struct DagRanking {
  Ranking ranking;
  std::shared_ptr<const LabelGraph> split_graph;
  SplitSearch search = SplitSearch::exhaustive;
  std::vector<LabelId> multi_parent_labels;
  std::vector<std::size_t> assignment;      // parent index per multi-parent label
  std::vector<LabelId> chosen_parents;      // parent label per multi-parent label
  Fixed eauc_exact = 0;
  double eauc = 0.0;
  std::vector<Fixed> split_eauc;            // per evaluated candidate, enumeration order
  std::size_t memo_hits = 0;
  std::vector<AndViolation> and_violations;  // diagnostic only
};

namespace detail {

struct ComponentSlots {
  std::vector<std::size_t> comp_of;              // per label
  std::vector<std::vector<std::size_t>> slots;   // multi-parent slots per component
};

inline ComponentSlots component_slots(const LabelGraph& g, const std::vector<LabelId>& mp) {
  ComponentSlots cs;
  const auto comps = g.components();
  cs.comp_of.assign(g.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (LabelId l : comps[c]) cs.comp_of[static_cast<std::size_t>(l)] = c;
  }
  cs.slots.resize(comps.size());
  for (std::size_t i = 0; i < mp.size(); ++i) cs.slots[cs.comp_of[static_cast<std::size_t>(mp[i])]].push_back(i);
  return cs;
}

// Odometer over the given slots of `a`, last slot fastest. False when done.
inline bool next_assignment(const LabelGraph& g, const std::vector<LabelId>& mp, std::span<const std::size_t> slots,
                            std::vector<std::size_t>& a) {
  for (std::size_t i = slots.size(); i-- > 0;) {
    const std::size_t s = slots[i];
    if (++a[s] < g.parents(mp[s]).size()) return true;
    a[s] = 0;
  }
  return false;
}

}  // namespace detail

// Ranks splits of `graph` and returns the best one. When the whole-graph split
// count fits under `cap` every split is ranked and the exact maximum kept
// (with the fast ranker, per-component block lists are memoized and only the
// global merge is rerun). Otherwise each component's split is chosen by the
// eAUC of that component's own instances, which needs only the per-component
// counts to fit under `cap`.
inline DagRanking rank_dag(std::shared_ptr<const LabelGraph> graph, const InstanceTable& table, Algo algo = Algo::fast,
                           std::size_t cap = kDefaultSplitCap) {
  const auto& mp = graph->multi_parent_labels();
  const auto cs = detail::component_slots(*graph, mp);
  const std::size_t k = graph->size();

  DagRanking best;
  best.multi_parent_labels = mp;

  if (detail::split_count(*graph, mp, cap) <= cap) {
    const SplitEnumeration splits(graph, cap);
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::vector<BlockList>> memo;
    bool have = false;
    for (std::size_t s = 0; s < splits.count(); ++s) {
      const auto assignment = splits.assignment(s);
      const auto split_graph = splits.split(assignment);
      const InstanceForest forest = build_instance_forest(split_graph, table);
      Ranking r;
      if (algo == Algo::fast) {
        std::vector<BlockList> lists;
        for (std::size_t c = 0; c < cs.slots.size(); ++c) {
          std::vector<std::size_t> key_assign;
          for (std::size_t slot : cs.slots[c]) key_assign.push_back(assignment[slot]);
          auto key = std::make_pair(c, std::move(key_assign));
          auto it = memo.find(key);
          if (it == memo.end()) {
            std::vector<BlockList> per_tree;
            for (std::size_t m = 0; m < forest.samples(); ++m) {
              for (auto& t : fast_sample_blocks(forest, m)) {
                if (cs.comp_of[static_cast<std::size_t>(t.root)] == c) per_tree.push_back(std::move(t.blocks));
              }
            }
            it = memo.emplace(std::move(key), std::move(per_tree)).first;
          } else {
            ++best.memo_hits;
          }
          lists.insert(lists.end(), it->second.begin(), it->second.end());
        }
        r = ranking_from_blocks(forest, kway_merge(std::move(lists)));
      } else {
        r = rank(forest, algo);
      }
      const Fixed e = eauc_exact(forest, r.order);
      best.split_eauc.push_back(e);
      if (!have || e > best.eauc_exact) {
        have = true;
        best.ranking = std::move(r);
        best.split_graph = split_graph;
        best.assignment = assignment;
        best.eauc_exact = e;
      }
    }
  } else {
    for (const auto& slots : cs.slots) {
      if (detail::split_count(*graph, [&] {
            std::vector<LabelId> ls;
            for (std::size_t s : slots) ls.push_back(mp[s]);
            return ls;
          }(), cap) > cap) {
        throw SplitCapExceededError("a component has more than " + std::to_string(cap) + " splits");
      }
    }
    best.search = SplitSearch::per_component;
    best.assignment.assign(mp.size(), 0);
    for (std::size_t c = 0; c < cs.slots.size(); ++c) {
      if (cs.slots[c].empty()) continue;
      std::vector<std::size_t> a = best.assignment;
      std::vector<std::size_t> chosen = a;
      bool have = false;
      Fixed top = 0;
      do {
        const InstanceForest forest = build_instance_forest(SplitEnumeration::split_graph(*graph, mp, a), table);
        const Ranking r = rank(forest, algo);
        std::vector<InstanceId> own;
        for (InstanceId v : r.order) {
          if (cs.comp_of[v % k] == c) own.push_back(v);
        }
        const Fixed e = eauc_exact(forest, own);
        best.split_eauc.push_back(e);
        if (!have || e > top) {
          have = true;
          top = e;
          chosen = a;
        }
      } while (detail::next_assignment(*graph, mp, cs.slots[c], a));
      for (std::size_t s : cs.slots[c]) best.assignment[s] = chosen[s];
    }
    best.split_graph = SplitEnumeration::split_graph(*graph, mp, best.assignment);
    const InstanceForest forest = build_instance_forest(best.split_graph, table);
    best.ranking = rank(forest, algo);
    best.eauc_exact = eauc_exact(forest, best.ranking.order);
  }
  best.eauc = from_fixed(best.eauc_exact);
  {
    const InstanceForest forest = build_instance_forest(best.split_graph, table);
    best.eauc = eauc(forest, best.ranking.order);
  }

  best.chosen_parents.clear();
  for (std::size_t i = 0; i < mp.size(); ++i) best.chosen_parents.push_back(graph->parents(mp[i])[best.assignment[i]]);

  const auto& pos = best.ranking.positions;
  for (InstanceId v = 0; v < best.ranking.size(); ++v) {
    const std::size_t sample = v / k;
    const auto label = static_cast<LabelId>(v % k);
    for (LabelId p : graph->parents(label)) {
      const InstanceId pv = static_cast<InstanceId>(sample * k + static_cast<std::size_t>(p));
      if (pos[pv] > pos[v]) best.and_violations.push_back({v, pv});
    }
  }
  return best;
}

}  // namespace hierlpr
