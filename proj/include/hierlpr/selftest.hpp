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

// Built-in checks: worked examples plus the small-forest oracle suite.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hierlpr/blocks.hpp"
#include "hierlpr/brute.hpp"
#include "hierlpr/cssa.hpp"
#include "hierlpr/experiments.hpp"
#include "hierlpr/fast.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/lpr_model.hpp"
#include "hierlpr/metrics.hpp"
#include "hierlpr/naive.hpp"
#include "hierlpr/random.hpp"

namespace hierlpr {

inline InstanceForest make_forest(std::span<const LabelId> parent, std::vector<double> lpr,
                                  std::optional<std::vector<std::uint8_t>> truth = std::nullopt) {
  auto g = std::make_shared<const LabelGraph>(LabelGraph::from_parents(parent));
  return build_instance_forest(g, InstanceTable::dense(parent.size(), std::move(lpr), std::move(truth)));
}

// Random forest with at most max_n instances: 1 or 2 samples, random tree
// shape over the labels, shuffled label ids. With `ties`, LPRs come from a
// coarse grid so equal values are common.
inline InstanceForest random_small_forest(Rng& rng, std::size_t max_n, bool ties) {
  const std::size_t samples = max_n >= 2 && (rng() & 1) ? 2 : 1;
  const std::size_t max_k = max_n / samples;
  const std::size_t k = 1 + static_cast<std::size_t>(rng() % max_k);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<LabelId> parent(k, kNoLabel);
  const double root_p = uniform01(rng) * 0.5;
  for (std::size_t i = 1; i < k; ++i) {
    if (uniform01(rng) < root_p) continue;
    parent[perm[i]] = static_cast<LabelId>(perm[rng() % i]);
  }
  std::vector<double> lpr(k * samples);
  for (auto& x : lpr) x = ties ? static_cast<double>(rng() % 4) / 4.0 + 0.125 : uniform01(rng);
  return make_forest(parent, std::move(lpr));
}

struct SelftestEntry {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::size_t trials = 100;
  std::size_t max_n = 10;
  std::uint64_t seed = 1;
  bool corrupt_tie_rule = false;  // fast ranker breaks ties the wrong way
};

struct SelftestReport {
  std::vector<SelftestEntry> entries;
  bool passed() const {
    for (const auto& e : entries) {
      if (!e.passed) return false;
    }
    return true;
  }
};

inline SelftestReport run_selftest(const SelftestOptions& opt = {}) {
  SelftestReport rep;
  const TieRule fast_rule = opt.corrupt_tie_rule ? TieRule::reversed : TieRule::canonical;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    rep.entries.push_back({std::move(name), ok, std::move(detail)});
  };
  auto lprs_of = [](const InstanceForest& f, const Ranking& r) {
    std::vector<double> v;
    for (InstanceId x : r.order) v.push_back(f.lpr(x));
    return v;
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

  {
    const std::vector<LabelId> parent{kNoLabel, 0, 0, kNoLabel};
    const auto f = make_forest(parent, {0.2, 0.9, 0.7, 0.65});
    const std::vector<double> want{0.65, 0.2, 0.9, 0.7};
    bool ok = true;
    for (const Ranking& r : {hier_lpr_naive(f), hier_lpr_fast(f, fast_rule), cssa_rank(f)}) {
      ok = ok && lprs_of(f, r) == want && near(eauc(f, r.order), 5.7);
    }
    const auto bf = brute_force_optimal(f);
    ok = ok && near(bf.eauc, 5.7) && bf.orderings == 8;
    add("example.four_node", ok, "expect [0.65, 0.2, 0.9, 0.7], eAUC 5.7, 8 orderings");
  }
  {
    const std::vector<LabelId> parent{kNoLabel, kNoLabel, 1};
    const auto f = make_forest(parent, {0.9, 0.5, 0.8});
    const auto r = hier_lpr_fast(f, fast_rule);
    add("example.chain_merge", lprs_of(f, r) == std::vector<double>{0.9, 0.5, 0.8} && near(eauc(f, r.order), 4.5));
  }
  {
    const std::vector<LabelId> parent{kNoLabel, 0, 1};
    const auto f = make_forest(parent, {0.4, 0.9, 0.3});
    const std::vector<InstanceId> chain{0, 1, 2};
    const auto b = breaking_points(f, chain);
    add("example.breaking_points",
        b.size() == 2 && b[0].size() == 2 && near(b[0].mean_lpr(), 0.65) && b[1].size() == 1 &&
            near(b[1].mean_lpr(), 0.3));
  }
  {
    const std::vector<LabelId> parent{kNoLabel, kNoLabel};
    const auto f = make_forest(parent, {0.7, 0.7});
    const auto naive = hier_lpr_naive(f);
    const auto fast = hier_lpr_fast(f, fast_rule);
    add("example.tie_lower_id_first", naive.order == std::vector<InstanceId>{0, 1} && fast.order == naive.order);
  }
  {
    const std::vector<LabelId> parent{kNoLabel, 0};
    const auto f = make_forest(parent, {0.4, 0.9});
    const auto st = cssa_relaxed(f, 1);
    add("example.cssa_fractional", near(st.psi[0], 0.5) && near(st.psi[1], 0.5));
  }
  {
    const std::vector<double> seq{0.9, 0.5, 0.8};
    const std::vector<std::uint8_t> bits{1, 0, 1};
    const std::vector<std::uint8_t> f_bits{1, 1, 0, 1};
    add("example.metrics",
        near(eauc(seq), 4.5) && hit_auc(bits) == 4 && near(f_measure_at(f_bits, 2, 3), 0.8));
  }
  {
    CallList c{{0.9, 0.8, 0.6, 0.5}, {1, 1, 0, 1}};
    const auto res = select_cutoff(c, Criterion{CriterionKind::precision, 0.9});
    add("example.cutoff_precision", near(res.lpr_star, 0.8) && res.cut == 2);
  }
  add("example.ltdr", near(lpr_from_densities(0.2, 2.0, 1.0), 1.0 / 3.0) &&
                          near(lpr_from_densities(0.2, 1.0, 1.0), 0.2));

  // Oracle suite: continuous draws for sequence identity and optimality,
  // tied draws for exact eAUC agreement.
  Rng rng = make_rng(opt.seed);
  std::size_t opt_fail = 0, seq_fail = 0, tie_fail = 0, valid_fail = 0;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const auto f = random_small_forest(rng, opt.max_n, false);
    const auto naive = hier_lpr_naive(f);
    const auto fast = hier_lpr_fast(f, fast_rule);
    const auto cssa = cssa_rank(f);
    const auto bf = brute_force_optimal(f);
    if (!near(eauc(f, naive.order), bf.eauc)) ++opt_fail;
    if (naive.order != fast.order || naive.order != cssa.order) ++seq_fail;
    for (const Ranking* r : {&naive, &fast, &cssa}) {
      if (!validate_ordering(f, r->order)) ++valid_fail;
    }

    const auto g = random_small_forest(rng, opt.max_n, true);
    const Fixed a = eauc_exact(g, hier_lpr_naive(g).order);
    const Fixed b = eauc_exact(g, hier_lpr_fast(g, fast_rule).order);
    const Fixed c = eauc_exact(g, cssa_rank(g).order);
    if (a != b || a != c || a != brute_force_optimal(g).eauc_exact) ++tie_fail;
  }
  // Equal-LPR singletons belong to the sequence property: the tie rule
  // fixes their order for all three rankers.
  {
    const std::vector<LabelId> parent{kNoLabel, kNoLabel, kNoLabel};
    const auto f = make_forest(parent, {0.5, 0.3, 0.5});
    if (hier_lpr_naive(f).order != hier_lpr_fast(f, fast_rule).order ||
        hier_lpr_naive(f).order != cssa_rank(f).order) {
      ++seq_fail;
    }
  }
  const std::string of = " of " + std::to_string(opt.trials);
  add("oracle.optimal_eauc", opt_fail == 0, std::to_string(opt_fail) + " failures" + of);
  add("oracle.sequence_identity", seq_fail == 0, std::to_string(seq_fail) + " failures" + of + " (+1 tie case)");
  add("oracle.tied_eauc_exact", tie_fail == 0, std::to_string(tie_fail) + " failures" + of);
  add("oracle.valid_orderings", valid_fail == 0, std::to_string(valid_fail) + " invalid");
  return rep;
}

}  // namespace hierlpr
