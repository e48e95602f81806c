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

#include <gtest/gtest.h>

#include <algorithm>

#include "hierlpr/dag_adapter.hpp"
#include "hierlpr/random.hpp"

using namespace hierlpr;

namespace {

std::shared_ptr<const LabelGraph> graph(std::size_t k, std::vector<Edge> edges) {
  return std::make_shared<const LabelGraph>(LabelGraph::with_edges(k, std::move(edges)));
}

// root 0; a 1, b 2 under root; c 3 under both a and b.
std::shared_ptr<const LabelGraph> diamond() { return graph(4, {{1, 0}, {2, 0}, {3, 1}, {3, 2}}); }

// Appends a component rooted at `base` with m two-parent labels: a spine of
// m + 1 labels under the root, then m labels each hung under two spine labels.
void add_component(std::vector<Edge>& edges, LabelId base, std::size_t m) {
  for (std::size_t i = 1; i <= m + 1; ++i) edges.emplace_back(base + static_cast<LabelId>(i), base);
  for (std::size_t j = 0; j < m; ++j) {
    const auto c = base + static_cast<LabelId>(m + 2 + j);
    edges.emplace_back(c, base + static_cast<LabelId>(1 + j));
    edges.emplace_back(c, base + static_cast<LabelId>(2 + j));
  }
}

InstanceTable random_table(std::uint64_t seed, std::size_t k, std::size_t samples) {
  Rng rng = make_rng(seed);
  std::vector<double> v(k * samples);
  for (auto& x : v) x = uniform01(rng);
  return InstanceTable::dense(k, std::move(v));
}

}  // namespace

TEST(SplitEnumeration, Counts) {
  std::vector<Edge> e;
  add_component(e, 0, 7);
  const auto g = graph(16, e);
  ASSERT_EQ(g->multi_parent_count(), 7u);
  EXPECT_EQ(enumerate_splits(g).count(), 128u);
  EXPECT_EQ(enumerate_splits(graph(3, {{1, 0}, {2, 1}})).count(), 1u);
  EXPECT_EQ(enumerate_splits(graph(4, {{3, 0}, {3, 1}, {3, 2}})).count(), 3u);
}

TEST(SplitEnumeration, EverySplitIsAForest) {
  std::vector<Edge> e;
  add_component(e, 0, 4);
  const auto g = graph(10, e);
  const auto s = enumerate_splits(g);
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto a = s.assignment(i);
    const auto f = s.split(a);
    EXPECT_EQ(f->kind(), GraphKind::forest);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const LabelId l = s.multi_parent_labels()[j];
      ASSERT_EQ(f->parents(l).size(), 1u);
      EXPECT_EQ(f->parents(l)[0], g->parents(l)[a[j]]);
    }
  }
}

TEST(RankDag, DiamondPicksHigherBranch) {
  const auto d = rank_dag(diamond(), InstanceTable::dense(4, {0.5, 0.4, 0.1, 0.9}));
  EXPECT_EQ(d.search, SplitSearch::exhaustive);
  ASSERT_EQ(d.chosen_parents.size(), 1u);
  EXPECT_EQ(d.chosen_parents[0], 1);
  EXPECT_NEAR(d.eauc, 5.1, 1e-12);
  EXPECT_EQ(d.ranking.order, (std::vector<InstanceId>{0, 1, 3, 2}));

  const auto swapped = rank_dag(diamond(), InstanceTable::dense(4, {0.5, 0.1, 0.4, 0.9}));
  EXPECT_EQ(swapped.chosen_parents[0], 2);
}

TEST(RankDag, AndViolationsReported) {
  const auto d = rank_dag(diamond(), InstanceTable::dense(4, {0.5, 0.4, 0.1, 0.9}));
  ASSERT_EQ(d.and_violations.size(), 1u);
  EXPECT_EQ(d.and_violations[0].node, 3u);
  EXPECT_EQ(d.and_violations[0].parent, 2u);
}

TEST(RankDag, MatchesDirectScan) {
  std::vector<Edge> e;
  add_component(e, 0, 7);
  const auto g = graph(16, e);
  const auto table = random_table(41, 16, 3);
  const auto s = enumerate_splits(g);
  std::vector<Fixed> direct;
  for (std::size_t i = 0; i < s.count(); ++i) {
    const auto f = build_instance_forest(s.split(s.assignment(i)), table);
    direct.push_back(eauc_exact(f, rank(f, Algo::naive).order));
  }
  for (Algo algo : {Algo::fast, Algo::naive, Algo::cssa}) {
    const auto d = rank_dag(g, table, algo);
    EXPECT_EQ(d.split_eauc, direct);
    EXPECT_EQ(d.eauc_exact, *std::max_element(direct.begin(), direct.end()));
    const auto f = build_instance_forest(d.split_graph, table);
    EXPECT_TRUE(validate_ordering(f, d.ranking.order));
    EXPECT_EQ(eauc_exact(f, d.ranking.order), d.eauc_exact);
  }
}

TEST(RankDag, MemoizesUnchangedComponents) {
  std::vector<Edge> e;
  add_component(e, 0, 2);
  add_component(e, 6, 2);
  const auto g = graph(12, e);
  const auto table = random_table(46, 12, 2);
  const auto d = rank_dag(g, table);
  // 16 splits visit each of the 4 + 4 component assignments; the rest hit.
  EXPECT_EQ(d.split_eauc.size(), 16u);
  EXPECT_EQ(d.memo_hits, 2 * 16u - 8u);
  EXPECT_EQ(d.eauc_exact, rank_dag(g, table, Algo::naive).eauc_exact);
}

TEST(RankDag, ForestInputIsDirectRanking) {
  const auto g = graph(5, {{1, 0}, {2, 0}, {3, 2}});
  const auto table = random_table(42, 5, 4);
  const auto d = rank_dag(g, table);
  EXPECT_EQ(d.split_eauc.size(), 1u);
  EXPECT_TRUE(d.and_violations.empty());
  EXPECT_EQ(d.ranking.order, rank(build_instance_forest(g, table), Algo::fast).order);
}

TEST(RankDag, PerComponentWhenGlobalCountTooLarge) {
  std::vector<Edge> e;
  add_component(e, 0, 2);
  add_component(e, 6, 2);
  const auto g = graph(12, e);
  const auto table = random_table(43, 12, 3);
  const auto exact = rank_dag(g, table, Algo::fast, 16);
  const auto split = rank_dag(g, table, Algo::fast, 4);
  EXPECT_EQ(exact.search, SplitSearch::exhaustive);
  EXPECT_EQ(split.search, SplitSearch::per_component);
  EXPECT_EQ(split.split_eauc.size(), 8u);
  EXPECT_LE(split.eauc_exact, exact.eauc_exact);
  const auto f = build_instance_forest(split.split_graph, table);
  EXPECT_TRUE(validate_ordering(f, split.ranking.order));

  // Each component's choice maximizes the eAUC of its own instances.
  for (std::size_t comp = 0; comp < 2; ++comp) {
    const LabelId lo = comp == 0 ? 0 : 6;
    auto own = [&](const std::vector<std::size_t>& a) {
      const auto fo = build_instance_forest(SplitEnumeration::split_graph(*g, g->multi_parent_labels(), a), table);
      std::vector<InstanceId> o;
      for (InstanceId v : rank(fo, Algo::fast).order) {
        const auto l = static_cast<LabelId>(v % 12);
        if (l >= lo && l < lo + 6) o.push_back(v);
      }
      return eauc_exact(fo, o);
    };
    const Fixed chosen = own(split.assignment);
    for (std::size_t x = 0; x < 4; ++x) {
      auto a = split.assignment;
      a[2 * comp] = x >> 1;
      a[2 * comp + 1] = x & 1;
      EXPECT_LE(own(a), chosen);
    }
  }
}

TEST(RankDag, GeoShapedGraphCompletes) {
  // 110 labels in 24 components; 17 two-parent labels, at most 7 per component.
  std::vector<Edge> e;
  LabelId base = 0;
  for (std::size_t m : {7u, 6u, 4u}) {
    add_component(e, base, m);
    base += static_cast<LabelId>(2 * m + 2);
  }
  // 21 more small trees fill the remaining 70 labels.
  for (int t = 0; t < 21; ++t) {
    const std::size_t sz = t < 7 ? 4 : 3;
    for (std::size_t i = 1; i < sz; ++i) {
      e.emplace_back(base + static_cast<LabelId>(i), base + static_cast<LabelId>((i - 1) / 2));
    }
    base += static_cast<LabelId>(sz);
  }
  ASSERT_EQ(base, 110);
  const auto g = graph(110, e);
  ASSERT_EQ(g->components().size(), 24u);
  ASSERT_EQ(g->multi_parent_count(), 17u);
  EXPECT_THROW(enumerate_splits(g), SplitCapExceededError);
  const auto table = random_table(44, 110, 50);
  const auto d = rank_dag(g, table);
  EXPECT_EQ(d.search, SplitSearch::per_component);
  EXPECT_EQ(d.split_eauc.size(), 128u + 64u + 16u);
  EXPECT_EQ(d.ranking.size(), 110u * 50u);
  EXPECT_TRUE(validate_ordering(build_instance_forest(d.split_graph, table), d.ranking.order));
}

TEST(RankDag, CapExceeded) {
  std::vector<Edge> e;
  add_component(e, 0, 13);
  const auto g = graph(28, e);
  EXPECT_THROW(enumerate_splits(g), SplitCapExceededError);
  EXPECT_THROW(rank_dag(g, random_table(45, 28, 1)), SplitCapExceededError);
  EXPECT_NO_THROW(enumerate_splits(g, 8192));
}
