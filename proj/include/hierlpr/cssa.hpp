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

// Supernode condensation (condensing sort and select) over the instance
// forest, as a full ranker and as the budgeted selector with a fractional
// last supernode.

#include <algorithm>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "hierlpr/blocks.hpp"
#include "hierlpr/error.hpp"
#include "hierlpr/hierarchy.hpp"

namespace hierlpr {

enum class CssaEventKind { condense, emit };

struct CssaEvent {
  CssaEventKind kind = CssaEventKind::emit;
  InstanceId head = kNoInstance;    // head of the popped supernode
  InstanceId target = kNoInstance;  // head of the parent supernode (condense only)
  std::vector<InstanceId> members;  // members of the popped supernode, in order
  Mass mass;
};

namespace detail {

// Live supernodes are keyed by their representative, which is always the head
// (topmost member). Members are kept as a singly linked list: parent-side
// members first, then each condensed child in condensation order.
class SupernodeEngine {
 public:
  SupernodeEngine(const InstanceForest& forest, TieRule rule)
      : forest_(forest), rule_(rule), n_(forest.size()) {
    rep_.resize(n_);
    mass_.resize(n_);
    next_.assign(n_, kNoInstance);
    last_.resize(n_);
    version_.assign(n_, 0);
    emitted_.assign(n_, 0);
    for (InstanceId v = 0; v < n_; ++v) {
      rep_[v] = v;
      mass_[v] = forest.mass(v);
      last_[v] = v;
      heap_.push({mass_[v], v, 0});
    }
  }

  std::size_t size() const { return n_; }
  bool emitted(InstanceId v) const { return emitted_[v] != 0; }
  const Mass& mass(InstanceId head) const { return mass_[head]; }

  // Pops the max-mean live supernode; returns its head or kNoInstance when empty.
  InstanceId pop() {
    while (!heap_.empty()) {
      Entry e = heap_.top();
      heap_.pop();
      if (emitted_[e.head] || rep_[e.head] != e.head || version_[e.head] != e.version) continue;
      return e.head;
    }
    return kNoInstance;
  }

  // Head of the supernode containing the original parent of `head`, or
  // kNoInstance when the supernode is parentless.
  InstanceId parent_supernode(InstanceId head) {
    const InstanceId p = forest_.parent(head);
    if (p == kNoInstance || emitted_[p]) return kNoInstance;
    return find(p);
  }

  std::vector<InstanceId> members(InstanceId head) const {
    std::vector<InstanceId> out;
    for (InstanceId v = head; v != kNoInstance; v = next_[v]) out.push_back(v);
    return out;
  }

  void emit(InstanceId head) {
    for (InstanceId v = head; v != kNoInstance; v = next_[v]) emitted_[v] = 1;
  }

  void condense(InstanceId child, InstanceId parent) {
    rep_[child] = parent;
    mass_[parent] += mass_[child];
    next_[last_[parent]] = child;
    last_[parent] = last_[child];
    heap_.push({mass_[parent], parent, ++version_[parent]});
  }

 private:
  struct Entry {
    Mass mass;
    InstanceId head;
    std::uint32_t version;
  };
  struct After {
    TieRule rule;
    bool operator()(const Entry& a, const Entry& b) const {
      return block_before(b.mass, b.head, a.mass, a.head, rule);
    }
  };

  InstanceId find(InstanceId v) {
    InstanceId r = v;
    while (rep_[r] != r) r = rep_[r];
    while (rep_[v] != r) {
      InstanceId nx = rep_[v];
      rep_[v] = r;
      v = nx;
    }
    return r;
  }

  const InstanceForest& forest_;
  TieRule rule_;
  std::size_t n_;
  std::vector<InstanceId> rep_;
  std::vector<Mass> mass_;
  std::vector<InstanceId> next_;
  std::vector<InstanceId> last_;
  std::vector<std::uint32_t> version_;
  std::vector<char> emitted_;
  std::priority_queue<Entry, std::vector<Entry>, After> heap_{After{rule_}};
};

}  // namespace detail

inline Ranking cssa_rank(const InstanceForest& forest, TieRule rule = TieRule::canonical,
                         std::vector<CssaEvent>* trace = nullptr) {
  if (forest.graph().kind() != GraphKind::forest) throw NotAForestError("cssa_rank needs a forest");
  detail::SupernodeEngine eng(forest, rule);
  Ranking r;
  r.tie_rule = rule;
  r.order.reserve(forest.size());
  for (InstanceId s = eng.pop(); s != kNoInstance; s = eng.pop()) {
    const InstanceId p = eng.parent_supernode(s);
    if (trace) {
      trace->push_back({p == kNoInstance ? CssaEventKind::emit : CssaEventKind::condense, s, p,
                        eng.members(s), eng.mass(s)});
    }
    if (p == kNoInstance) {
      auto m = eng.members(s);
      r.add_block(forest, m);
      eng.emit(s);
    } else {
      eng.condense(s, p);
    }
  }
  r.finish(forest.size());
  return r;
}

struct CssaRelaxedState {
  std::vector<double> psi;  // per instance, in [0, 1]
  std::size_t gamma = 0;    // nodes covered by selected supernodes (virtual root excluded)
  std::size_t budget = 0;
  std::vector<InstanceId> selected;  // nodes with psi > 0, in selection order
};

// The virtual root above all trees carries psi = 1 and is not counted in
// gamma, so a budget L selects supernodes until L real nodes are covered.
inline CssaRelaxedState cssa_relaxed(const InstanceForest& forest, std::size_t budget,
                                     TieRule rule = TieRule::canonical) {
  if (forest.graph().kind() != GraphKind::forest) throw NotAForestError("cssa_relaxed needs a forest");
  if (budget < 1 || budget > forest.size()) {
    throw BudgetError("budget " + std::to_string(budget) + " outside [1, " + std::to_string(forest.size()) +
                      "]");
  }
  detail::SupernodeEngine eng(forest, rule);
  CssaRelaxedState st;
  st.budget = budget;
  st.psi.assign(forest.size(), 0.0);
  while (st.gamma < budget) {
    const InstanceId s = eng.pop();
    if (s == kNoInstance) break;
    const InstanceId p = eng.parent_supernode(s);
    if (p != kNoInstance) {
      eng.condense(s, p);
      continue;
    }
    const auto members = eng.members(s);
    const double share =
        std::min(1.0, static_cast<double>(budget - st.gamma) / static_cast<double>(members.size()));
    for (InstanceId v : members) {
      st.psi[v] = share;
      st.selected.push_back(v);
    }
    st.gamma += members.size();
    eng.emit(s);
  }
  return st;
}

}  // namespace hierlpr
