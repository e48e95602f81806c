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

#include "hierlpr/experiments.hpp"

using namespace hierlpr;

TEST(Setting, GeneratedDataMeetsClassMinimums) {
  for (int id = 1; id <= 4; ++id) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto st = make_setting(id, 100 + seed);
      const auto ds = generate_dataset(st);
      ASSERT_EQ(ds.train.samples(), st.train_size);
      ASSERT_EQ(ds.test.samples(), st.test_size);
      for (std::size_t l = 0; l < 3; ++l) {
        std::size_t pos = 0;
        for (std::size_t s = 0; s < st.train_size; ++s) pos += (*ds.train.truth)[s * 3 + l];
        EXPECT_GE(pos, st.min_positives) << id << " " << seed << " " << l;
      }
      // Truth respects the hierarchy.
      EXPECT_NO_THROW(build_instance_forest(ds.graph, ds.train));
    }
  }
  EXPECT_THROW(make_setting(5), ValidationError);
}

TEST(Setting, RootPrevalenceOverride) {
  auto st = make_setting(1, 7);
  st.root_prevalence = 1.0;
  const auto ds = generate_dataset(st);
  for (std::size_t s = 0; s < st.train_size; ++s) EXPECT_EQ((*ds.train.truth)[s * 3], 1);
  EXPECT_EQ(ds.rates[0], 1.0);
}

TEST(Cutoff, PrecisionTarget) {
  const CallList c{{0.9, 0.8, 0.7}, {1, 1, 0}};
  const auto r = select_cutoff(c, {CriterionKind::precision, 0.8});
  EXPECT_EQ(r.lpr_star, 0.8);
  EXPECT_EQ(r.cut, 2u);
  EXPECT_EQ(r.train_value, 1.0);
  EXPECT_EQ(apply_cutoff(c, r.lpr_star), 2u);
}

TEST(Cutoff, UnattainableAndAllPositive) {
  const CallList neg{{0.9, 0.8, 0.7}, {0, 0, 0}};
  EXPECT_THROW(select_cutoff(neg, {CriterionKind::precision, 0.8}), UnattainableTargetError);
  EXPECT_THROW(select_cutoff(neg, {CriterionKind::max_f, 0.0}), UnattainableTargetError);
  const CallList pos{{0.9, 0.8, 0.7}, {1, 1, 1}};
  const auto r = select_cutoff(pos, {CriterionKind::precision, 0.99});
  EXPECT_EQ(r.cut, 3u);
  EXPECT_EQ(r.lpr_star, 0.7);
}

TEST(Cutoff, OnlyAtScoreDrops) {
  // Precision 1 after the first call, but the tie means a threshold can only
  // take both.
  const CallList c{{0.9, 0.9, 0.5}, {1, 0, 0}};
  const auto r = select_cutoff(c, {CriterionKind::precision, 0.5});
  EXPECT_EQ(r.cut, 2u);
  EXPECT_THROW(select_cutoff(c, {CriterionKind::precision, 0.9}), UnattainableTargetError);
}

TEST(Cutoff, MaxFDiffAgainstTestOptimum) {
  const CallList train{{0.9, 0.8, 0.7, 0.6}, {1, 1, 0, 0}};
  auto r = select_cutoff(train, {CriterionKind::max_f, 0.0});
  EXPECT_EQ(r.lpr_star, 0.8);
  const CallList test{{0.95, 0.85, 0.75}, {1, 0, 1}};
  ASSERT_TRUE(evaluate_cutoff(r, test));
  EXPECT_EQ(r.test_cut, 2u);
  // Best test F is 0.8 at three calls; the cut gives F = 0.5.
  EXPECT_NEAR(r.diff, 30.0, 1e-9);
  CutoffResult high = r;
  high.lpr_star = 0.99;
  EXPECT_FALSE(evaluate_cutoff(high, test));
}

TEST(Study, SmokeRun) {
  const auto res = run_replication_study(make_setting(1, 5), 2);
  EXPECT_EQ(res.outcomes.size(), 2u);
  ASSERT_EQ(res.criteria.size(), table2_criteria().size());
  for (const auto& cs : res.criteria) EXPECT_EQ(cs.used + cs.dropped, 2u);
  EXPECT_EQ(res.pr_hier.size(), res.recall_grid.size());
  EXPECT_THROW(run_replication_study(make_setting(1, 5), 1), ValidationError);
}

TEST(Study, ThreadCountDoesNotChangeResults) {
  const auto a = run_replication_study(make_setting(2, 9), 4, 1);
  const auto b = run_replication_study(make_setting(2, 9), 4, 3);
  ASSERT_EQ(a.criteria.size(), b.criteria.size());
  for (std::size_t c = 0; c < a.criteria.size(); ++c) {
    EXPECT_EQ(a.criteria[c].mean, b.criteria[c].mean);
    EXPECT_EQ(a.criteria[c].used, b.criteria[c].used);
  }
  EXPECT_EQ(a.pr_hier, b.pr_hier);
}

TEST(Study, StandaloneNodesMatchLprOnly) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto o = run_replication(make_setting(4, 30 + seed), 0, table2_criteria());
    EXPECT_TRUE(o.hier_equals_lpr_only) << seed;
  }
}
