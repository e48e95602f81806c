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

// Three-label synthetic study: score generation by node quality, LPR fitting
// on one half of the training pool, cutoff selection on the other half and
// evaluation of the chosen cutoff on the test set.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/fast.hpp"
#include "hierlpr/hierarchy.hpp"
#include "hierlpr/lpr_model.hpp"
#include "hierlpr/metrics.hpp"
#include "hierlpr/random.hpp"

namespace hierlpr {

enum class Quality { high, medium, low };

struct BetaPair {
  double a = 1.0;
  double b = 1.0;
};

struct QualityParams {
  BetaPair positive;
  BetaPair negative;
};

inline QualityParams quality_params(Quality q) {
  switch (q) {
    case Quality::high:
      return {{6.0, 2.0}, {2.0, 6.0}};
    case Quality::medium:
      return {{6.0, 4.0}, {4.0, 6.0}};
    case Quality::low:
      return {{6.0, 5.5}, {5.5, 6.0}};
  }
  return {};
}

inline const char* to_string(Quality q) {
  return q == Quality::high ? "high" : q == Quality::medium ? "medium" : "low";
}

struct SimSetting {
  int id = 1;
  std::vector<LabelId> parent;  // per label, kNoLabel for roots
  std::vector<Quality> quality;
  std::size_t train_size = 5000;
  std::size_t test_size = 1000;
  std::size_t min_positives = 15;
  std::size_t max_attempts = 10000;
  double fit_fraction = 0.5;  // share of the training pool used to fit LPR curves
  std::optional<double> root_prevalence;  // drawn U(0,1) per dataset when unset
  std::uint64_t seed = 0;
};

// 1: high -> medium -> low chain. 2: high root over low and medium leaves.
// 3: low -> low -> high chain. 4: three standalone nodes.
inline SimSetting make_setting(int id, std::uint64_t seed = 0) {
  SimSetting s;
  s.id = id;
  s.seed = seed;
  switch (id) {
    case 1:
      s.parent = {kNoLabel, 0, 1};
      s.quality = {Quality::high, Quality::medium, Quality::low};
      break;
    case 2:
      s.parent = {kNoLabel, 0, 0};
      s.quality = {Quality::high, Quality::low, Quality::medium};
      break;
    case 3:
      s.parent = {kNoLabel, 0, 1};
      s.quality = {Quality::low, Quality::low, Quality::high};
      break;
    case 4:
      s.parent = {kNoLabel, kNoLabel, kNoLabel};
      s.quality = {Quality::high, Quality::medium, Quality::low};
      break;
    default:
      throw ValidationError("unknown simulation setting " + std::to_string(id));
  }
  return s;
}

struct SimDataset {
  std::shared_ptr<const LabelGraph> graph;
  std::vector<double> rates;  // per label: root prevalence or conditional rate given the parent
  InstanceTable train;
  InstanceTable test;
  std::size_t attempts = 0;
};

namespace detail {

inline InstanceTable draw_table(const SimSetting& st, const std::vector<LabelId>& topo,
                                const std::vector<double>& rates, std::size_t samples, Rng& rng) {
  const std::size_t k = st.parent.size();
  std::vector<double> values(samples * k);
  std::vector<std::uint8_t> truth(samples * k);
  for (std::size_t s = 0; s < samples; ++s) {
    for (LabelId l : topo) {
      const auto li = static_cast<std::size_t>(l);
      const LabelId p = st.parent[li];
      const bool parent_on = p == kNoLabel || truth[s * k + static_cast<std::size_t>(p)] != 0;
      const bool on = parent_on && uniform01(rng) < rates[li];
      truth[s * k + li] = on ? 1 : 0;
    }
    for (std::size_t l = 0; l < k; ++l) {
      const auto q = quality_params(st.quality[l]);
      const BetaPair& d = truth[s * k + l] ? q.positive : q.negative;
      values[s * k + l] = sample_beta(rng, d.a, d.b);
    }
  }
  return InstanceTable::dense(k, std::move(values), std::move(truth));
}

inline std::size_t count_positives(const InstanceTable& t, std::size_t label, std::size_t from, std::size_t to) {
  std::size_t c = 0;
  for (std::size_t s = from; s < to; ++s) c += (*t.truth)[s * t.labels + label];
  return c;
}

}  // namespace detail

// Draws rates and truth root-down, then scores from the quality's Beta pair.
// A draw is rejected when a label has fewer than min_positives training
// positives or when either training half lacks two examples of each class.
// A root whose prevalence is pinned to 1 is exempt from the negative count; its
// curve cannot be fitted, so such datasets are only useful for truth checks.
inline SimDataset generate_dataset(const SimSetting& st, Rng& rng) {
  const std::size_t k = st.parent.size();
  if (k == 0 || st.quality.size() != k) throw ValidationError("setting needs one quality per label");
  if (st.train_size < 8 || st.test_size == 0) throw ValidationError("setting needs train >= 8 and test >= 1");
  SimDataset ds;
  ds.graph = std::make_shared<const LabelGraph>(LabelGraph::from_parents(st.parent));
  std::vector<LabelId> topo;
  for (std::size_t l = 0; l < k; ++l) {
    if (st.parent[l] == kNoLabel) topo.push_back(static_cast<LabelId>(l));
  }
  for (std::size_t i = 0; i < topo.size(); ++i) {
    for (LabelId c : ds.graph->children(topo[i])) topo.push_back(c);
  }

  const auto fit_n = static_cast<std::size_t>(std::floor(st.fit_fraction * static_cast<double>(st.train_size)));
  for (std::size_t attempt = 1; attempt <= st.max_attempts; ++attempt) {
    ds.rates.assign(k, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
      ds.rates[l] = (st.parent[l] == kNoLabel && st.root_prevalence) ? *st.root_prevalence : uniform01(rng);
    }
    InstanceTable train = detail::draw_table(st, topo, ds.rates, st.train_size, rng);
    bool ok = true;
    for (std::size_t l = 0; l < k && ok; ++l) {
      const std::size_t all = detail::count_positives(train, l, 0, st.train_size);
      const std::size_t first = detail::count_positives(train, l, 0, fit_n);
      const std::size_t second = all - first;
      const bool pinned = st.parent[l] == kNoLabel && ds.rates[l] >= 1.0;
      ok = all >= st.min_positives && first >= 2 && second >= 2 &&
           (pinned || (fit_n - first >= 2 && (st.train_size - fit_n) - second >= 2));
    }
    if (!ok) continue;
    ds.train = std::move(train);
    ds.test = detail::draw_table(st, topo, ds.rates, st.test_size, rng);
    ds.attempts = attempt;
    return ds;
  }
  throw RetryExhaustedError("no dataset met the positive-count constraint in " + std::to_string(st.max_attempts) +
                            " attempts");
}

inline SimDataset generate_dataset(const SimSetting& st) {
  Rng rng = make_rng(st.seed);
  return generate_dataset(st, rng);
}

// Sorted calls with the score a threshold acts on. A cut may only fall where
// the score strictly drops, so every cut is expressible as "score >= t".
struct CallList {
  std::vector<double> score;
  std::vector<std::uint8_t> truth;

  std::size_t size() const { return score.size(); }
  bool boundary_after(std::size_t i) const { return i + 1 == score.size() || score[i + 1] < score[i]; }
  std::size_t positives() const { return static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1)); }
};

// Scores are block means, which is what a threshold on HierLPR output sees.
inline CallList call_list(const InstanceForest& forest, const Ranking& r) {
  if (!forest.has_truth()) throw ValidationError("call list needs ground truth");
  CallList c;
  c.score.reserve(r.size());
  c.truth.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    c.score.push_back(r.block_mean(k));
    c.truth.push_back(forest.truth(r.order[k]) ? 1 : 0);
  }
  return c;
}

// Hierarchy-free baseline: LPR descending, instance id ascending.
inline std::vector<InstanceId> lpr_only_order(const InstanceForest& forest) {
  std::vector<InstanceId> order(forest.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](InstanceId a, InstanceId b) { return forest.mass(a).sum > forest.mass(b).sum; });
  return order;
}

inline CallList call_list(const InstanceForest& forest, std::span<const InstanceId> order) {
  CallList c;
  for (InstanceId v : order) {
    c.score.push_back(forest.lpr(v));
    c.truth.push_back(forest.truth(v) ? 1 : 0);
  }
  return c;
}

enum class CriterionKind { max_f, precision };

struct Criterion {
  CriterionKind kind = CriterionKind::max_f;
  double target = 0.0;  // precision only

  std::string name() const {
    if (kind == CriterionKind::max_f) return "max_f";
    std::string s = std::to_string(target);
    s.erase(s.find_last_not_of('0') + 1);
    return "precision_" + s;
  }
};

struct CutoffResult {
  Criterion criterion;
  double lpr_star = 0.0;
  std::size_t cut = 0;         // calls made on the list it was selected on
  double train_value = 0.0;    // F or precision at that cut
  double test_value = 0.0;
  double diff = 0.0;           // percentage points
  std::size_t test_cut = 0;
};

inline double f_from_counts(std::size_t hits, std::size_t calls, std::size_t positives) {
  if (hits == 0 || calls == 0 || positives == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(calls);
  const double r = static_cast<double>(hits) / static_cast<double>(positives);
  return 2.0 * p * r / (p + r);
}

// Precision target: the longest cut with precision >= target. Max F: the
// first cut reaching the largest F.
inline CutoffResult select_cutoff(const CallList& calls, Criterion crit) {
  CutoffResult res;
  res.criterion = crit;
  const std::size_t total = calls.positives();
  std::size_t hits = 0;
  bool found = false;
  double best_f = -1.0;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    hits += calls.truth[i];
    if (!calls.boundary_after(i)) continue;
    const std::size_t k = i + 1;
    if (crit.kind == CriterionKind::precision) {
      const double p = static_cast<double>(hits) / static_cast<double>(k);
      if (p >= crit.target) {
        found = true;
        res.cut = k;
        res.train_value = p;
        res.lpr_star = calls.score[i];
      }
    } else {
      const double f = f_from_counts(hits, k, total);
      if (f > best_f) {
        best_f = f;
        found = f > 0.0;
        res.cut = k;
        res.train_value = f;
        res.lpr_star = calls.score[i];
      }
    }
  }
  if (!found) {
    throw UnattainableTargetError(crit.kind == CriterionKind::precision
                                      ? "no cut reaches precision " + std::to_string(crit.target)
                                      : "no cut has a positive F-measure");
  }
  return res;
}

// Number of leading calls with score >= lpr_star.
inline std::size_t apply_cutoff(const CallList& calls, double lpr_star) {
  std::size_t k = 0;
  while (k < calls.size() && calls.score[k] >= lpr_star) ++k;
  return k;
}

inline double precision_at(const CallList& calls, std::size_t k) {
  if (k == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += calls.truth[i];
  return static_cast<double>(hits) / static_cast<double>(k);
}

inline double f_at(const CallList& calls, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += calls.truth[i];
  return f_from_counts(hits, k, calls.positives());
}

// Largest F over admissible cuts of the list (the ground-truth optimum).
inline double best_f(const CallList& calls) {
  const std::size_t total = calls.positives();
  std::size_t hits = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    hits += calls.truth[i];
    if (calls.boundary_after(i)) best = std::max(best, f_from_counts(hits, i + 1, total));
  }
  return best;
}

// Evaluates a selected cutoff on test calls. Precision diff: target minus test
// precision. Max-F diff: best test F minus test F at the cutoff. Returns false
// when the cutoff calls nothing on the test list.
inline bool evaluate_cutoff(CutoffResult& res, const CallList& test) {
  res.test_cut = apply_cutoff(test, res.lpr_star);
  if (res.test_cut == 0) return false;
  if (res.criterion.kind == CriterionKind::precision) {
    res.test_value = precision_at(test, res.test_cut);
    res.diff = 100.0 * (res.criterion.target - res.test_value);
  } else {
    res.test_value = f_at(test, res.test_cut);
    res.diff = 100.0 * (best_f(test) - res.test_value);
  }
  return true;
}

inline std::vector<Criterion> table2_criteria() {
  return {{CriterionKind::max_f, 0.0},
          {CriterionKind::precision, 0.8},
          {CriterionKind::precision, 0.9},
          {CriterionKind::precision, 0.95},
          {CriterionKind::precision, 0.99}};
}

struct RepOutcome {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::vector<std::optional<CutoffResult>> cutoffs;  // per criterion; empty when dropped
  std::vector<std::string> drop_reason;
  std::vector<PrPoint> pr_hier;
  std::vector<PrPoint> pr_lpr_only;
  bool hier_equals_lpr_only = false;
};

// One replication. The fitted LPR curves come from the first part of the
// training pool; cutoffs are chosen on HierLPR's ranking of the rest.
inline RepOutcome run_replication(const SimSetting& base, std::size_t rep, const std::vector<Criterion>& criteria,
                                  const FitOptions& fit = {}) {
  RepOutcome out;
  out.rep = rep;
  out.seed = base.seed + rep;
  SimSetting st = base;
  st.seed = out.seed;
  const SimDataset ds = generate_dataset(st);
  const std::size_t k = ds.graph->size();
  const auto fit_n = static_cast<std::size_t>(std::floor(st.fit_fraction * static_cast<double>(st.train_size)));

  auto slice = [&](const InstanceTable& t, std::size_t from, std::size_t to) {
    std::vector<double> v(t.values.begin() + static_cast<std::ptrdiff_t>(from * k),
                          t.values.begin() + static_cast<std::ptrdiff_t>(to * k));
    std::vector<std::uint8_t> q(t.truth->begin() + static_cast<std::ptrdiff_t>(from * k),
                                t.truth->begin() + static_cast<std::ptrdiff_t>(to * k));
    return InstanceTable::dense(k, std::move(v), std::move(q));
  };
  const InstanceTable fit_part = slice(ds.train, 0, fit_n);
  const InstanceTable select_part = slice(ds.train, fit_n, st.train_size);

  const auto cols = columns_of(fit_part);
  const LprModel model = fit_lpr_model(cols, k, fit);
  const InstanceForest sel = build_instance_forest(ds.graph, lpr_table(model, select_part));
  const InstanceForest test = build_instance_forest(ds.graph, lpr_table(model, ds.test));

  const Ranking sel_rank = hier_lpr_fast(sel);
  const Ranking test_rank = hier_lpr_fast(test);
  const CallList sel_calls = call_list(sel, sel_rank);
  const CallList test_calls = call_list(test, test_rank);

  for (const auto& c : criteria) {
    try {
      CutoffResult r = select_cutoff(sel_calls, c);
      if (evaluate_cutoff(r, test_calls)) {
        out.cutoffs.emplace_back(r);
        out.drop_reason.emplace_back();
      } else {
        out.cutoffs.emplace_back(std::nullopt);
        out.drop_reason.emplace_back("cutoff calls nothing on test");
      }
    } catch (const UnattainableTargetError&) {
      out.cutoffs.emplace_back(std::nullopt);
      out.drop_reason.emplace_back("unattainable on training");
    }
  }

  const auto lpr_order = lpr_only_order(test);
  const std::size_t positives = test_calls.positives();
  if (positives > 0) {
    out.pr_hier = pr_curve(test_calls.truth, positives);
    out.pr_lpr_only = pr_curve(call_list(test, lpr_order).truth, positives);
  }
  out.hier_equals_lpr_only = lpr_order == test_rank.order;
  return out;
}

struct CriterionSummary {
  Criterion criterion;
  std::size_t used = 0;
  std::size_t dropped = 0;
  double mean = 0.0;      // signed diff, percentage points
  double sd = 0.0;
  double mean_abs = 0.0;
};

struct StudyResult {
  int setting = 0;
  std::size_t reps = 0;
  std::vector<CriterionSummary> criteria;
  std::vector<RepOutcome> outcomes;
  std::vector<double> recall_grid;
  std::vector<double> pr_hier;      // averaged precision per grid point
  std::vector<double> pr_lpr_only;
  std::size_t pr_reps = 0;
  std::size_t hier_equals_lpr_only = 0;
};

inline StudyResult run_replication_study(const SimSetting& st, std::size_t reps, std::size_t threads = 1,
                                         const std::vector<Criterion>& criteria = table2_criteria(),
                                         const FitOptions& fit = {}) {
  if (reps < 2) throw ValidationError("replication study needs at least 2 reps");
  std::vector<std::optional<RepOutcome>> slots(reps);
  std::vector<std::exception_ptr> errors(reps);
  auto work = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t r = worker; r < reps; r += stride) {
      try {
        slots[r] = run_replication(st, r, criteria, fit);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, reps);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  StudyResult res;
  res.setting = st.id;
  res.reps = reps;
  PrAverager hier;
  PrAverager flat;
  for (auto& s : slots) {
    res.outcomes.push_back(std::move(*s));
    const auto& o = res.outcomes.back();
    if (!o.pr_hier.empty()) {
      hier.add(o.pr_hier);
      flat.add(o.pr_lpr_only);
    }
    res.hier_equals_lpr_only += o.hier_equals_lpr_only ? 1 : 0;
  }
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    CriterionSummary cs;
    cs.criterion = criteria[c];
    std::vector<double> diffs;
    for (const auto& o : res.outcomes) {
      if (o.cutoffs[c]) {
        diffs.push_back(o.cutoffs[c]->diff);
      } else {
        ++cs.dropped;
      }
    }
    cs.used = diffs.size();
    if (!diffs.empty()) {
      for (double d : diffs) {
        cs.mean += d;
        cs.mean_abs += std::abs(d);
      }
      cs.mean /= static_cast<double>(diffs.size());
      cs.mean_abs /= static_cast<double>(diffs.size());
      if (diffs.size() > 1) {
        double v = 0.0;
        for (double d : diffs) v += (d - cs.mean) * (d - cs.mean);
        cs.sd = std::sqrt(v / static_cast<double>(diffs.size() - 1));
      }
    }
    res.criteria.push_back(cs);
  }
  res.recall_grid = hier.grid();
  res.pr_hier = hier.mean();
  res.pr_lpr_only = flat.mean();
  res.pr_reps = hier.count();
  return res;
}

}  // namespace hierlpr
