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

// Label hierarchies, per-sample instance forests and orderings over them.
//
// A LabelGraph describes the K labels. An InstanceForest replicates the
// label forest once per sample, so there are n = K * M instances, each
// identified by sample * K + label. That id is the canonical total order used
// for every tie decision in the rankers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/mass.hpp"

namespace hierlpr {

using LabelId = int;
using InstanceId = std::uint32_t;

inline constexpr LabelId kNoLabel = -1;
inline constexpr InstanceId kNoInstance = static_cast<InstanceId>(-1);

enum class GraphKind { forest, tree_like_dag };

struct LabelRecord {
  LabelId id = 0;
  std::string name;
};

// (child, parent)
using Edge = std::pair<LabelId, LabelId>;

class LabelGraph {
 public:
  LabelGraph() = default;

  // Throws ValidationError on non-dense ids, out-of-range or duplicate edges,
  // and CycleError when the edges contain a directed cycle.
  LabelGraph(std::vector<LabelRecord> labels, std::vector<Edge> edges)
      : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end(),
              [](const LabelRecord& a, const LabelRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].id != static_cast<LabelId>(i)) {
        throw ValidationError("label ids must be unique and dense in [0, K); got " +
                              std::to_string(labels_[i].id) + " at rank " + std::to_string(i));
      }
    }
    const auto k = labels_.size();
    parents_.assign(k, {});
    children_.assign(k, {});
    for (auto [child, parent] : edges) {
      if (child < 0 || parent < 0 || static_cast<std::size_t>(child) >= k ||
          static_cast<std::size_t>(parent) >= k) {
        throw ValidationError("edge (" + std::to_string(child) + ", " + std::to_string(parent) +
                              ") references an unknown label");
      }
      if (child == parent) throw CycleError("label " + std::to_string(child) + " is its own parent");
      parents_[child].push_back(parent);
      children_[parent].push_back(child);
    }
    for (std::size_t l = 0; l < k; ++l) {
      std::sort(parents_[l].begin(), parents_[l].end());
      std::sort(children_[l].begin(), children_[l].end());
      if (std::adjacent_find(parents_[l].begin(), parents_[l].end()) != parents_[l].end()) {
        throw ValidationError("duplicate edge into label " + std::to_string(l));
      }
    }
    check_acyclic();
    multi_parent_.clear();
    for (std::size_t l = 0; l < k; ++l) {
      if (parents_[l].size() > 1) multi_parent_.push_back(static_cast<LabelId>(l));
    }
  }

  // Unnamed labels 0..k-1 with the given (child, parent) edges.
  static LabelGraph with_edges(std::size_t k, std::vector<Edge> edges) {
    std::vector<LabelRecord> labels(k);
    for (std::size_t i = 0; i < k; ++i) labels[i] = {static_cast<LabelId>(i), "L" + std::to_string(i)};
    return LabelGraph(std::move(labels), std::move(edges));
  }

  // parent[i] == kNoLabel marks a root.
  static LabelGraph from_parents(std::span<const LabelId> parent) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < parent.size(); ++i) {
      if (parent[i] != kNoLabel) edges.emplace_back(static_cast<LabelId>(i), parent[i]);
    }
    return with_edges(parent.size(), std::move(edges));
  }

  std::size_t size() const { return labels_.size(); }
  const LabelRecord& label(LabelId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<LabelRecord>& labels() const { return labels_; }

  std::span<const LabelId> parents(LabelId id) const { return parents_[static_cast<std::size_t>(id)]; }
  std::span<const LabelId> children(LabelId id) const { return children_[static_cast<std::size_t>(id)]; }

  GraphKind kind() const { return multi_parent_.empty() ? GraphKind::forest : GraphKind::tree_like_dag; }
  const std::vector<LabelId>& multi_parent_labels() const { return multi_parent_; }
  std::size_t multi_parent_count() const { return multi_parent_.size(); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t c = 0; c < parents_.size(); ++c) {
      for (LabelId p : parents_[c]) out.emplace_back(static_cast<LabelId>(c), p);
    }
    return out;
  }

  std::vector<LabelId> roots() const {
    std::vector<LabelId> out;
    for (std::size_t l = 0; l < parents_.size(); ++l) {
      if (parents_[l].empty()) out.push_back(static_cast<LabelId>(l));
    }
    return out;
  }

  // Weakly connected components, each sorted, ordered by smallest member.
  std::vector<std::vector<LabelId>> components() const {
    const auto k = size();
    std::vector<LabelId> comp(k, kNoLabel);
    std::vector<std::vector<LabelId>> out;
    for (std::size_t start = 0; start < k; ++start) {
      if (comp[start] != kNoLabel) continue;
      const auto c = static_cast<LabelId>(out.size());
      out.emplace_back();
      std::vector<LabelId> stack{static_cast<LabelId>(start)};
      comp[start] = c;
      while (!stack.empty()) {
        LabelId v = stack.back();
        stack.pop_back();
        out.back().push_back(v);
        auto visit = [&](LabelId w) {
          if (comp[static_cast<std::size_t>(w)] == kNoLabel) {
            comp[static_cast<std::size_t>(w)] = c;
            stack.push_back(w);
          }
        };
        for (LabelId w : parents_[static_cast<std::size_t>(v)]) visit(w);
        for (LabelId w : children_[static_cast<std::size_t>(v)]) visit(w);
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }

 private:
  void check_acyclic() const {
    const auto k = size();
    std::vector<std::size_t> indegree(k);
    for (std::size_t l = 0; l < k; ++l) indegree[l] = parents_[l].size();
    std::vector<LabelId> ready;
    for (std::size_t l = 0; l < k; ++l) {
      if (indegree[l] == 0) ready.push_back(static_cast<LabelId>(l));
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
      LabelId v = ready.back();
      ready.pop_back();
      ++seen;
      for (LabelId c : children_[static_cast<std::size_t>(v)]) {
        if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
      }
    }
    if (seen != k) {
      for (std::size_t l = 0; l < k; ++l) {
        if (indegree[l] != 0) throw CycleError("directed cycle through label " + std::to_string(l));
      }
    }
  }

  std::vector<LabelRecord> labels_;
  std::vector<std::vector<LabelId>> parents_;
  std::vector<std::vector<LabelId>> children_;
  std::vector<LabelId> multi_parent_;
};

// Per-(sample, label) values, sample-major. NaN marks a missing cell.
struct InstanceTable {
  std::size_t labels = 0;
  std::vector<std::string> sample_ids;
  std::vector<double> values;
  std::optional<std::vector<std::uint8_t>> truth;

  std::size_t samples() const { return sample_ids.size(); }
  std::size_t size() const { return values.size(); }
  double value(std::size_t sample, LabelId label) const {
    return values[sample * labels + static_cast<std::size_t>(label)];
  }

  // Samples are named "0", "1", ...
  static InstanceTable dense(std::size_t labels, std::vector<double> values,
                             std::optional<std::vector<std::uint8_t>> truth = std::nullopt) {
    InstanceTable t;
    t.labels = labels;
    const std::size_t m = labels == 0 ? 0 : values.size() / labels;
    for (std::size_t s = 0; s < m; ++s) t.sample_ids.push_back(std::to_string(s));
    t.values = std::move(values);
    t.truth = std::move(truth);
    return t;
  }
};

class InstanceForest {
 public:
  InstanceForest() = default;

  const LabelGraph& graph() const { return *graph_; }
  std::shared_ptr<const LabelGraph> graph_ptr() const { return graph_; }
  std::size_t labels() const { return k_; }
  std::size_t samples() const { return m_; }
  std::size_t size() const { return lpr_.size(); }

  InstanceId id(std::size_t sample, LabelId label) const {
    return static_cast<InstanceId>(sample * k_ + static_cast<std::size_t>(label));
  }
  std::size_t sample_of(InstanceId v) const { return v / k_; }
  LabelId label_of(InstanceId v) const { return static_cast<LabelId>(v % k_); }

  double lpr(InstanceId v) const { return lpr_[v]; }
  std::span<const double> lprs() const { return lpr_; }
  Mass mass(InstanceId v) const { return Mass{fixed_[v], 1}; }

  bool has_truth() const { return truth_.has_value(); }
  bool truth(InstanceId v) const { return (*truth_)[v] != 0; }
  std::span<const std::uint8_t> truths() const { return *truth_; }

  InstanceId parent(InstanceId v) const {
    LabelId p = label_parent_[static_cast<std::size_t>(label_of(v))];
    return p == kNoLabel ? kNoInstance : id(sample_of(v), p);
  }
  std::span<const LabelId> child_labels(LabelId label) const { return graph_->children(label); }
  std::size_t child_count(InstanceId v) const { return graph_->children(label_of(v)).size(); }
  std::vector<InstanceId> children(InstanceId v) const {
    std::vector<InstanceId> out;
    for (LabelId c : graph_->children(label_of(v))) out.push_back(id(sample_of(v), c));
    return out;
  }
  const std::vector<LabelId>& label_parents() const { return label_parent_; }

  friend InstanceForest build_instance_forest(std::shared_ptr<const LabelGraph> graph,
                                              const InstanceTable& table);

 private:
  std::shared_ptr<const LabelGraph> graph_;
  std::size_t k_ = 0;
  std::size_t m_ = 0;
  std::vector<LabelId> label_parent_;
  std::vector<double> lpr_;
  std::vector<Fixed> fixed_;
  std::optional<std::vector<std::uint8_t>> truth_;
};

inline InstanceForest build_instance_forest(std::shared_ptr<const LabelGraph> graph,
                                            const InstanceTable& table) {
  if (!graph) throw ValidationError("null label graph");
  if (graph->kind() != GraphKind::forest) {
    throw NotAForestError(std::to_string(graph->multi_parent_count()) +
                          " label(s) have multiple parents; split the DAG first");
  }
  const std::size_t k = graph->size();
  if (table.labels != k) {
    throw MissingScoreError("table has " + std::to_string(table.labels) + " labels, hierarchy has " +
                            std::to_string(k));
  }
  const std::size_t m = table.samples();
  if (table.values.size() != k * m) {
    throw MissingScoreError("expected " + std::to_string(k * m) + " cells, got " +
                            std::to_string(table.values.size()));
  }
  InstanceForest f;
  f.graph_ = std::move(graph);
  f.k_ = k;
  f.m_ = m;
  f.label_parent_.assign(k, kNoLabel);
  for (std::size_t l = 0; l < k; ++l) {
    auto ps = f.graph_->parents(static_cast<LabelId>(l));
    if (!ps.empty()) f.label_parent_[l] = ps.front();
  }
  f.lpr_ = table.values;
  f.fixed_.resize(f.lpr_.size());
  for (std::size_t i = 0; i < f.lpr_.size(); ++i) {
    const double v = f.lpr_[i];
    if (std::isnan(v)) {
      throw MissingScoreError("no value for sample " + table.sample_ids[i / k] + ", label " +
                              std::to_string(i % k));
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("LPR " + std::to_string(v) + " outside [0, 1] for sample " +
                            table.sample_ids[i / k] + ", label " + std::to_string(i % k));
    }
    f.fixed_[i] = to_fixed(v);
  }
  if (table.truth) {
    if (table.truth->size() != f.lpr_.size()) {
      throw MissingScoreError("truth column covers " + std::to_string(table.truth->size()) +
                              " of " + std::to_string(f.lpr_.size()) + " cells");
    }
    for (std::size_t i = 0; i < f.lpr_.size(); ++i) {
      const auto v = static_cast<InstanceId>(i);
      const InstanceId p = f.parent(v);
      if ((*table.truth)[i] && p != kNoInstance && !(*table.truth)[p]) {
        throw TruthInconsistencyError("sample " + table.sample_ids[i / k] + ": label " +
                                      std::to_string(i % k) + " is positive but its parent " +
                                      std::to_string(f.label_of(p)) + " is not");
      }
    }
    f.truth_ = table.truth;
  }
  return f;
}

inline InstanceForest build_instance_forest(const LabelGraph& graph, const InstanceTable& table) {
  return build_instance_forest(std::make_shared<const LabelGraph>(graph), table);
}

// A pure descent path with cumulative sums for the sub-chains C_r(i).
class ChainView {
 public:
  ChainView() = default;

  // Follows unique children from root to a leaf; NotAForestError if some
  // node on the way branches.
  static ChainView walk(const InstanceForest& forest, InstanceId root) {
    std::vector<InstanceId> nodes;
    InstanceId v = root;
    while (true) {
      nodes.push_back(v);
      auto kids = forest.child_labels(forest.label_of(v));
      if (kids.empty()) break;
      if (kids.size() > 1) {
        throw NotAForestError("instance " + std::to_string(v) + " branches; not a pure chain");
      }
      v = forest.id(forest.sample_of(v), kids.front());
    }
    return from_nodes(forest, std::move(nodes));
  }

  // Arbitrary node sequence treated as a chain (e.g. an already merged chain).
  static ChainView from_nodes(const InstanceForest& forest, std::vector<InstanceId> nodes) {
    ChainView c;
    c.nodes_ = std::move(nodes);
    c.prefix_.resize(c.nodes_.size() + 1);
    c.prefix_sum_.resize(c.nodes_.size() + 1);
    for (std::size_t i = 0; i < c.nodes_.size(); ++i) {
      c.prefix_[i + 1] = c.prefix_[i] + forest.mass(c.nodes_[i]);
      c.prefix_sum_[i + 1] = c.prefix_sum_[i] + forest.lpr(c.nodes_[i]);
    }
    return c;
  }

  InstanceId root() const { return nodes_.front(); }
  const std::vector<InstanceId>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Sum of the first i LPRs.
  double prefix_sum(std::size_t i) const { return prefix_sum_[i]; }
  double prefix_mean(std::size_t i) const { return prefix_sum_[i] / static_cast<double>(i); }
  // Exact mass of the first i nodes, and of nodes [from, to).
  const Mass& prefix_mass(std::size_t i) const { return prefix_[i]; }
  Mass range_mass(std::size_t from, std::size_t to) const { return prefix_[to] - prefix_[from]; }

 private:
  std::vector<InstanceId> nodes_;
  std::vector<Mass> prefix_;
  std::vector<double> prefix_sum_;
};

struct JunctionSet {
  std::vector<InstanceId> members;  // ascending

  bool contains(InstanceId v) const { return std::binary_search(members.begin(), members.end(), v); }
  std::size_t size() const { return members.size(); }
};

namespace detail {

// pure[l]: the subtree under label l is a single descent path.
inline std::vector<bool> pure_labels(const LabelGraph& g) {
  const auto k = g.size();
  std::vector<bool> pure(k, false);
  std::vector<LabelId> order;  // children before parents
  std::vector<std::size_t> pending(k);
  for (std::size_t l = 0; l < k; ++l) {
    pending[l] = g.children(static_cast<LabelId>(l)).size();
    if (pending[l] == 0) order.push_back(static_cast<LabelId>(l));
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (LabelId p : g.parents(order[i])) {
      if (--pending[static_cast<std::size_t>(p)] == 0) order.push_back(p);
    }
  }
  for (LabelId l : order) {
    auto kids = g.children(l);
    pure[static_cast<std::size_t>(l)] =
        kids.empty() || (kids.size() == 1 && pure[static_cast<std::size_t>(kids.front())]);
  }
  return pure;
}

}  // namespace detail

// Labels with several children, each child heading a pure chain.
inline std::vector<LabelId> junction_labels(const LabelGraph& g) {
  auto pure = detail::pure_labels(g);
  std::vector<LabelId> out;
  for (std::size_t l = 0; l < g.size(); ++l) {
    auto kids = g.children(static_cast<LabelId>(l));
    if (kids.size() < 2) continue;
    bool all = std::all_of(kids.begin(), kids.end(),
                           [&](LabelId c) { return pure[static_cast<std::size_t>(c)]; });
    if (all) out.push_back(static_cast<LabelId>(l));
  }
  return out;
}

inline JunctionSet compute_junction_set(const InstanceForest& forest) {
  const auto labels = junction_labels(forest.graph());
  JunctionSet js;
  js.members.reserve(labels.size() * forest.samples());
  for (std::size_t s = 0; s < forest.samples(); ++s) {
    for (LabelId l : labels) js.members.push_back(forest.id(s, l));
  }
  return js;
}

struct OrderingCheck {
  bool ok = true;
  InstanceId ancestor = kNoInstance;
  InstanceId descendant = kNoInstance;

  explicit operator bool() const { return ok; }
};

// True iff every instance appears after its parent (hence after all of its
// ancestors). On failure reports the first position whose parent is missing.
inline OrderingCheck validate_ordering(const InstanceForest& forest, std::span<const InstanceId> order) {
  if (order.size() != forest.size()) {
    throw LengthMismatchError("ordering has " + std::to_string(order.size()) + " entries, forest has " +
                              std::to_string(forest.size()));
  }
  std::vector<bool> placed(forest.size(), false);
  OrderingCheck res;
  for (InstanceId v : order) {
    if (v >= forest.size() || placed[v]) {
      throw ValidationError("ordering is not a permutation (instance " + std::to_string(v) + ")");
    }
    const InstanceId p = forest.parent(v);
    if (res.ok && p != kNoInstance && !placed[p]) {
      res.ok = false;
      res.ancestor = p;
      res.descendant = v;
    }
    placed[v] = true;
  }
  return res;
}

// Visits every hierarchy-consistent permutation once, in lexicographic order
// of instance ids. Throws CapExceededError as soon as more than `cap` orderings
// have been produced. Returns the number visited.
inline std::size_t for_each_topological_ordering(
    const InstanceForest& forest, std::size_t cap,
    const std::function<void(std::span<const InstanceId>)>& visit) {
  const std::size_t n = forest.size();
  std::vector<InstanceId> prefix;
  prefix.reserve(n);
  std::vector<int> missing_parent(n, 0);
  for (InstanceId v = 0; v < n; ++v) {
    if (forest.parent(v) != kNoInstance) missing_parent[v] = 1;
  }
  std::vector<bool> used(n, false);
  std::size_t count = 0;

  std::function<void()> recurse = [&]() {
    if (prefix.size() == n) {
      if (++count > cap) throw CapExceededError(cap, count - 1);
      visit(prefix);
      return;
    }
    for (InstanceId v = 0; v < n; ++v) {
      if (used[v] || missing_parent[v] != 0) continue;
      used[v] = true;
      prefix.push_back(v);
      const auto kids = forest.children(v);
      for (InstanceId c : kids) missing_parent[c] = 0;
      recurse();
      for (InstanceId c : kids) missing_parent[c] = 1;
      prefix.pop_back();
      used[v] = false;
    }
  };
  recurse();
  return count;
}

inline std::vector<std::vector<InstanceId>> enumerate_topological_orderings(const InstanceForest& forest,
                                                                            std::size_t cap) {
  std::vector<std::vector<InstanceId>> out;
  for_each_topological_ordering(forest, cap, [&](std::span<const InstanceId> o) {
    out.emplace_back(o.begin(), o.end());
  });
  return out;
}

enum class TieRule {
  canonical,  // equal means: smaller head id first
  reversed,   // equal means: larger head id first (fault injection only)
};

inline const char* to_string(TieRule r) {
  return r == TieRule::canonical ? "mean-desc/head-id-asc/longest-prefix" : "reversed-head-id";
}

struct RankedBlock {
  InstanceId head = kNoInstance;
  std::size_t begin = 0;
  std::size_t size = 0;
  Mass mass;
};

// A hierarchy-consistent permutation together with the blocks it was
// emitted in (block means are nonincreasing along the ranking).
struct Ranking {
  std::vector<InstanceId> order;
  std::vector<std::size_t> positions;
  std::vector<std::uint32_t> block_of;  // per rank position
  std::vector<RankedBlock> blocks;
  TieRule tie_rule = TieRule::canonical;

  std::size_t size() const { return order.size(); }

  // Mean of the block containing rank position k.
  double block_mean(std::size_t k) const { return blocks[block_of[k]].mass.mean(); }

  void add_block(const InstanceForest& forest, std::span<const InstanceId> members) {
    RankedBlock b;
    b.head = members.front();
    b.begin = order.size();
    b.size = members.size();
    const auto id = static_cast<std::uint32_t>(blocks.size());
    for (InstanceId v : members) {
      b.mass += forest.mass(v);
      order.push_back(v);
      block_of.push_back(id);
    }
    blocks.push_back(b);
  }

  // Positions of instances absent from the ranking stay at npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  void finish(std::size_t n) {
    positions.assign(n, npos);
    for (std::size_t k = 0; k < order.size(); ++k) positions[order[k]] = k;
  }
};

}  // namespace hierlpr
