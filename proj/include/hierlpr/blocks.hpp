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

// Block-level machinery shared by the fast ranker: the maximal-prefix-average
// partition of a chain, agglomeration of an upstream chain with a merged
// downstream chain, and the k-way merge of descending block lists.

#include <compare>
#include <queue>
#include <span>
#include <vector>

#include "hierlpr/hierarchy.hpp"
#include "hierlpr/mass.hpp"

namespace hierlpr {

struct Block {
  std::vector<InstanceId> members;  // contiguous chain segment, in chain order
  Mass mass;
  double sum_lpr = 0.0;

  InstanceId head() const { return members.front(); }
  std::size_t size() const { return members.size(); }
  double mean_lpr() const { return sum_lpr / static_cast<double>(members.size()); }
};

using BlockList = std::vector<Block>;

// Strict "a is emitted before b": larger mean, then the tie rule on heads.
inline bool block_before(const Mass& a, InstanceId head_a, const Mass& b, InstanceId head_b,
                         TieRule rule = TieRule::canonical) {
  auto c = compare_means(a, b);
  if (c != 0) return c > 0;
  return rule == TieRule::canonical ? head_a < head_b : head_a > head_b;
}

namespace detail {

inline Block make_block(const InstanceForest& forest, std::span<const InstanceId> nodes) {
  Block b;
  b.members.assign(nodes.begin(), nodes.end());
  for (InstanceId v : nodes) {
    b.mass += forest.mass(v);
    b.sum_lpr += forest.lpr(v);
  }
  return b;
}

inline void absorb(Block& into, Block&& tail) {
  into.members.insert(into.members.end(), tail.members.begin(), tail.members.end());
  into.mass += tail.mass;
  into.sum_lpr += tail.sum_lpr;
}

}  // namespace detail

// Greedy maximal-prefix-average partition: the first block is the longest
// prefix with the largest average, then the same on the remainder. Built in
// one left-to-right pass: a new node is merged into the block before it while
// that block's mean does not exceed its own, which leaves block means
// strictly decreasing and collapses equal-mean neighbours.
inline BlockList breaking_points(const InstanceForest& forest, std::span<const InstanceId> chain) {
  BlockList out;
  out.reserve(chain.size());
  for (InstanceId v : chain) {
    Block cur = detail::make_block(forest, std::span<const InstanceId>(&v, 1));
    while (!out.empty() && compare_means(out.back().mass, cur.mass) <= 0) {
      Block prev = std::move(out.back());
      out.pop_back();
      detail::absorb(prev, std::move(cur));
      cur = std::move(prev);
    }
    out.push_back(std::move(cur));
  }
  return out;
}

inline BlockList breaking_points(const InstanceForest& forest, const ChainView& chain) {
  return breaking_points(forest, std::span<const InstanceId>(chain.nodes()));
}

// Joins the blocks of an upstream chain with the blocks of the merged chain
// hanging below it. The first downstream block b0 swallows its predecessor
// while its mean is at least the predecessor's, and its successor while the
// successor's mean is at least its own. Equal means merge so the result stays
// strictly decreasing. Members are concatenated once at the end.
inline BlockList agglomerate(BlockList upstream, BlockList downstream) {
  if (downstream.empty()) return upstream;
  if (upstream.empty()) return downstream;
  std::size_t up_end = upstream.size();  // upstream[up_end - 1] is b_{-1}
  std::size_t down_begin = 1;            // downstream[down_begin] is b_{+1}
  Mass mass = downstream.front().mass;
  while (true) {
    if (up_end > 0 && compare_means(mass, upstream[up_end - 1].mass) >= 0) {
      mass += upstream[up_end - 1].mass;
      --up_end;
    } else if (down_begin < downstream.size() && compare_means(downstream[down_begin].mass, mass) >= 0) {
      mass += downstream[down_begin].mass;
      ++down_begin;
    } else {
      break;
    }
  }
  Block b0;
  for (std::size_t i = up_end; i < upstream.size(); ++i) detail::absorb(b0, std::move(upstream[i]));
  for (std::size_t i = 0; i < down_begin; ++i) detail::absorb(b0, std::move(downstream[i]));
  BlockList out;
  out.reserve(up_end + 1 + downstream.size() - down_begin);
  for (std::size_t i = 0; i < up_end; ++i) out.push_back(std::move(upstream[i]));
  out.push_back(std::move(b0));
  for (std::size_t i = down_begin; i < downstream.size(); ++i) out.push_back(std::move(downstream[i]));
  return out;
}

// Merges block lists that are each in emission order into one list in
// emission order. O(s log k) for s blocks in k lists.
inline BlockList kway_merge(std::vector<BlockList> lists, TieRule rule = TieRule::canonical) {
  // The key lives in the cursor so heap sifts stay in cache.
  struct Cursor {
    Mass mass;
    InstanceId head;
    std::size_t list;
    std::size_t pos;
  };
  auto after = [rule](const Cursor& a, const Cursor& b) { return block_before(b.mass, b.head, a.mass, a.head, rule); };
  auto cursor = [&](std::size_t list, std::size_t pos) {
    const Block& b = lists[list][pos];
    return Cursor{b.mass, b.head(), list, pos};
  };
  std::vector<Cursor> store;
  store.reserve(lists.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    total += lists[i].size();
    if (!lists[i].empty()) store.push_back(cursor(i, 0));
  }
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(after)> heap(after, std::move(store));
  BlockList out;
  out.reserve(total);
  while (!heap.empty()) {
    const Cursor c = heap.top();
    heap.pop();
    out.push_back(std::move(lists[c.list][c.pos]));
    if (c.pos + 1 < lists[c.list].size()) heap.push(cursor(c.list, c.pos + 1));
  }
  return out;
}

inline Ranking ranking_from_blocks(const InstanceForest& forest, const BlockList& blocks,
                                   TieRule rule = TieRule::canonical) {
  Ranking r;
  r.tie_rule = rule;
  r.order.reserve(forest.size());
  for (const auto& b : blocks) r.add_block(forest, b.members);
  r.finish(forest.size());
  return r;
}

}  // namespace hierlpr
