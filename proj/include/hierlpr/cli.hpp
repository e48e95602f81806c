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

// Command-line front end. Needs CLI11 and nlohmann/json on the include path.
// Exit status: 0 ok, 2 invalid input, 3 unattainable target, 1 anything else.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hierlpr/csv_io.hpp"
#include "hierlpr/dag_adapter.hpp"
#include "hierlpr/experiments.hpp"
#include "hierlpr/lpr_model.hpp"
#include "hierlpr/metrics.hpp"
#include "hierlpr/ranker.hpp"
#include "hierlpr/selftest.hpp"

namespace hierlpr {

inline constexpr const char* kVersion = "1.0.0";

namespace cli {

using nlohmann::ordered_json;

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation:
      return 2;
    case ErrorCategory::unattainable:
      return 3;
    default:
      return 1;
  }
}

inline ordered_json mass_json(const Mass& m) {
  return {{"sum", fixed_to_string(m.sum)}, {"size", m.size}, {"scale_bits", kFixedBits}};
}

inline std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

// A ranking CSV joined with truth for the curves and cutoff commands.
struct ScoredRanking {
  std::vector<double> lpr;
  std::vector<double> block_mean;
  std::vector<std::uint8_t> truth;
};

inline ScoredRanking load_scored_ranking(const std::string& ranking_path, const std::string& truth_path) {
  const RankingFile rf = read_ranking_csv(ranking_path);
  const auto t = csv::read(truth_path);
  const std::size_t c_sample = t.column("sample_id");
  const std::size_t c_label = t.column("label_id");
  const std::size_t c_truth = t.column("truth");
  std::map<std::pair<std::string, long long>, std::uint8_t> truth;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    truth[{t.rows[r][c_sample], csv::to_int(t, r, c_label)}] = csv::to_bit(t, r, c_truth) ? 1 : 0;
  }
  ScoredRanking s;
  for (std::size_t i = 0; i < rf.rows.size(); ++i) {
    const auto& row = rf.rows[i];
    auto it = truth.find({row.sample_id, static_cast<long long>(row.label)});
    if (it == truth.end()) {
      throw ValidationError(truth_path + ": no truth for (" + row.sample_id + ", " + std::to_string(row.label) +
                            ")");
    }
    s.lpr.push_back(row.lpr);
    s.block_mean.push_back(rf.block_mean[i]);
    s.truth.push_back(it->second);
  }
  return s;
}

inline std::optional<CriterionKind> parse_criterion(const std::string& s) {
  if (s == "maxf") return CriterionKind::max_f;
  if (s == "precision") return CriterionKind::precision;
  return std::nullopt;
}

struct Options {
  bool json = false;
  std::size_t threads = 1;
  bool version = false;

  // rank
  std::string algo = "fast";
  std::string hierarchy, lpr, out;
  bool dag = false;
  std::string dag_out;
  std::size_t split_cap = kDefaultSplitCap;

  // estimate-lpr
  std::string train, apply, method = "smooth";
  std::optional<double> bandwidth;
  std::size_t grid = 512;
  std::optional<std::size_t> labels;

  // curves / cutoff
  std::string ranking, truth, out_dir;
  std::string criterion = "maxf";
  double target = 0.9;
  std::string test_ranking, test_truth;

  // simulate
  int setting = 1;
  std::size_t reps = 100;
  std::uint64_t seed = 20260101;

  // selftest
  std::size_t trials = 100;
  bool corrupt_tie_rule = false;
};

inline int cmd_rank(const Options& o, std::ostream& out) {
  const auto algo = parse_algo(o.algo);
  if (!algo) throw ValidationError("unknown algorithm '" + o.algo + "'");
  auto graph = std::make_shared<const LabelGraph>(read_hierarchy_csv(o.hierarchy));
  const InstanceTable table = read_scores_csv(o.lpr, graph->size());

  ordered_json summary{{"command", "rank"}, {"algo", std::string(to_string(*algo))}};
  Ranking r;
  std::shared_ptr<const LabelGraph> used = graph;
  if (graph->kind() == GraphKind::tree_like_dag) {
    if (!o.dag) {
      throw NotAForestError("hierarchy has " + std::to_string(graph->multi_parent_count()) +
                            " multi-parent labels; pass --dag");
    }
    DagRanking d = rank_dag(graph, table, *algo, o.split_cap);
    ordered_json side{{"splits", d.split_eauc.size()}, {"memo_hits", d.memo_hits}, {"assignment", ordered_json::array()}};
    for (std::size_t i = 0; i < d.multi_parent_labels.size(); ++i) {
      const LabelId l = d.multi_parent_labels[i];
      const auto ps = graph->parents(l);
      side["assignment"].push_back({{"label_id", l},
                                    {"name", graph->label(l).name},
                                    {"parents", std::vector<LabelId>(ps.begin(), ps.end())},
                                    {"chosen_parent", d.chosen_parents[i]}});
    }
    side["search"] = d.search == SplitSearch::exhaustive ? "exhaustive" : "per_component";
    side["eauc"] = d.eauc;
    side["eauc_fixed"] = fixed_to_string(d.eauc_exact);
    side["and_violations"] = d.and_violations.size();
    const std::string side_path = !o.dag_out.empty() ? o.dag_out : (o.out.empty() ? "" : o.out + ".split.json");
    if (!side_path.empty()) atomic_write(side_path, json_text(side));
    summary["dag"] = side;
    r = std::move(d.ranking);
    used = d.split_graph;
  } else {
    r = rank(build_instance_forest(graph, table), *algo);
  }
  const InstanceForest forest = build_instance_forest(used, table);
  const std::string csv_text = ranking_csv(forest, r, table.sample_ids);
  if (o.out.empty()) {
    if (!o.json) out << csv_text;
  } else {
    atomic_write(o.out, csv_text);
  }

  summary["instances"] = forest.size();
  summary["eauc"] = eauc(forest, r.order);
  summary["eauc_fixed"] = fixed_to_string(eauc_exact(forest, r.order));
  if (forest.has_truth()) summary["hit_auc"] = compute_curves(forest, r.order).hit_auc;
  ordered_json blocks = ordered_json::array();
  for (std::size_t b = 0; b < r.blocks.size(); ++b) {
    const auto& blk = r.blocks[b];
    blocks.push_back({{"block_id", b}, {"size", blk.size}, {"mean", blk.mass.mean()}, {"mass", mass_json(blk.mass)}});
  }
  summary["blocks"] = blocks;
  if (o.json) out << json_text(summary);
  return 0;
}

inline int cmd_estimate(const Options& o, std::ostream& out) {
  if (o.method != "smooth" && o.method != "ltdr") throw ValidationError("unknown method '" + o.method + "'");
  std::size_t k = o.labels.value_or(0);
  if (!o.labels) {
    k = scores_label_count(o.train);
    if (!o.apply.empty()) k = std::max(k, scores_label_count(o.apply));
  }
  const InstanceTable train = read_scores_csv(o.train, k);
  const InstanceTable target = o.apply.empty() ? train : read_scores_csv(o.apply, k);
  const auto cols = columns_of(train);

  InstanceTable lpr = target;
  ordered_json labels = ordered_json::array();
  if (o.method == "smooth") {
    FitOptions fit;
    fit.bandwidth = o.bandwidth;
    fit.grid_size = o.grid;
    const LprModel model = fit_lpr_model(cols, k, fit);
    lpr = lpr_table(model, target);
    for (const auto& c : model) {
      labels.push_back({{"label_id", c->label},
                        {"prevalence", c->prevalence},
                        {"bandwidth", c->bandwidth},
                        {"monotone_violation", check_monotonicity(*c).max_violation}});
    }
  } else {
    std::vector<DensityModel> models;
    for (const auto& c : cols) models.push_back(DensityModel::fit_kde(c));
    for (std::size_t i = 0; i < lpr.values.size(); ++i) {
      if (std::isnan(lpr.values[i])) continue;
      lpr.values[i] = lpr_from_densities(models[i % k], lpr.values[i]);
    }
    for (const auto& m : models) labels.push_back({{"label_id", m.label}, {"prevalence", m.prevalence}});
  }
  const std::string text = scores_csv(lpr);
  if (o.out.empty()) {
    if (!o.json) out << text;
  } else {
    atomic_write(o.out, text);
  }
  if (o.json) {
    out << json_text({{"command", "estimate-lpr"}, {"method", o.method}, {"instances", lpr.values.size()},
                      {"labels", labels}});
  }
  return 0;
}

inline int cmd_curves(const Options& o, std::ostream& out) {
  const ScoredRanking s = load_scored_ranking(o.ranking, o.truth);
  const CurveSet cs = compute_curves(s.lpr, s.truth);
  std::string hit = "calls,hits\n";
  for (const auto& p : cs.hit_curve) hit += std::to_string(p.calls) + "," + std::to_string(p.hits) + "\n";
  std::string pr = "recall,precision\n";
  for (const auto& p : cs.pr) pr += format_double(p.recall) + "," + format_double(p.precision) + "\n";
  ordered_json summary{{"eauc", cs.eauc},
                       {"hit_auc", cs.hit_auc},
                       {"max_f", cs.max_f.value},
                       {"cut_index", cs.max_f.cut_index}};
  const std::filesystem::path dir(o.out_dir);
  atomic_write((dir / "hit.csv").string(), hit);
  atomic_write((dir / "pr.csv").string(), pr);
  atomic_write((dir / "summary.json").string(), json_text(summary));
  if (o.json) {
    summary["command"] = "curves";
    out << json_text(summary);
  } else {
    out << "eauc " << format_double(cs.eauc) << "\nhit_auc " << cs.hit_auc << "\nmax_f "
        << format_double(cs.max_f.value) << " at " << cs.max_f.cut_index << "\n";
  }
  return 0;
}

inline int cmd_cutoff(const Options& o, std::ostream& out) {
  const auto kind = parse_criterion(o.criterion);
  if (!kind) throw ValidationError("unknown criterion '" + o.criterion + "'");
  if (*kind == CriterionKind::precision && !(o.target > 0.0 && o.target <= 1.0)) {
    throw ValidationError("precision target must lie in (0, 1]");
  }
  const ScoredRanking s = load_scored_ranking(o.ranking, o.truth);
  const CallList train{s.block_mean, s.truth};
  CutoffResult res = select_cutoff(train, Criterion{*kind, o.target});
  ordered_json summary{{"command", "cutoff"},
                       {"criterion", res.criterion.name()},
                       {"lpr_star", res.lpr_star},
                       {"cut", res.cut},
                       {"train_value", res.train_value}};
  if (!o.test_ranking.empty()) {
    const ScoredRanking t = load_scored_ranking(o.test_ranking, o.test_truth.empty() ? o.truth : o.test_truth);
    const CallList test{t.block_mean, t.truth};
    const bool ok = evaluate_cutoff(res, test);
    summary["test_cut"] = res.test_cut;
    if (ok) {
      summary["test_value"] = res.test_value;
      summary["diff_pp"] = res.diff;
    }
  }
  if (o.json) {
    out << json_text(summary);
  } else {
    out << "lpr_star " << format_double(res.lpr_star) << "\ncut " << res.cut << "\n";
  }
  return 0;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.setting < 1 || o.setting > 4) throw ValidationError("setting must be 1, 2, 3 or 4");
  const SimSetting st = make_setting(o.setting, o.seed);
  const StudyResult res = run_replication_study(st, o.reps, o.threads);
  const std::filesystem::path dir(o.out_dir);
  const auto crits = table2_criteria();

  for (const auto& rep : res.outcomes) {
    std::string s = "criterion,lpr_star,train_cut,train_value,test_cut,test_value,diff_pp,dropped\n";
    for (std::size_t c = 0; c < crits.size(); ++c) {
      if (const auto& r = rep.cutoffs[c]) {
        s += crits[c].name() + "," + format_double(r->lpr_star) + "," + std::to_string(r->cut) + "," +
             format_double(r->train_value) + "," + std::to_string(r->test_cut) + "," + format_double(r->test_value) +
             "," + format_double(r->diff) + ",\n";
      } else {
        s += crits[c].name() + ",,,,,,," + rep.drop_reason[c] + "\n";
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03zu.csv", rep.rep);
    atomic_write((dir / name).string(), s);
  }

  ordered_json table{{"setting", res.setting}, {"reps", res.reps}, {"seed", o.seed}, {"criteria", ordered_json::array()}};
  for (const auto& c : res.criteria) {
    table["criteria"].push_back({{"criterion", c.criterion.name()},
                                 {"used", c.used},
                                 {"dropped", c.dropped},
                                 {"mean_diff_pp", c.mean},
                                 {"sd_pp", c.sd},
                                 {"mean_abs_diff_pp", c.mean_abs}});
  }
  table["hier_equals_lpr_only"] = res.hier_equals_lpr_only;
  atomic_write((dir / "table2.json").string(), json_text(table));

  std::string pr = "recall,hier_lpr,lpr_only\n";
  for (std::size_t i = 0; i < res.recall_grid.size(); ++i) {
    pr += format_double(res.recall_grid[i]) + "," + format_double(res.pr_hier[i]) + "," +
          format_double(res.pr_lpr_only[i]) + "\n";
  }
  atomic_write((dir / "pr_avg.csv").string(), pr);

  if (o.json) {
    table["command"] = "simulate";
    out << json_text(table);
  } else {
    for (const auto& c : res.criteria) {
      out << c.criterion.name() << " used " << c.used << " mean " << format_double(c.mean) << " sd "
          << format_double(c.sd) << " mean_abs " << format_double(c.mean_abs) << "\n";
    }
  }
  return 0;
}

inline int cmd_selftest(const Options& o, std::ostream& out) {
  SelftestOptions so;
  so.trials = o.trials;
  so.seed = o.seed;
  so.corrupt_tie_rule = o.corrupt_tie_rule;
  const SelftestReport rep = run_selftest(so);
  if (o.json) {
    ordered_json j{{"command", "selftest"}, {"passed", rep.passed()}, {"properties", ordered_json::array()}};
    for (const auto& e : rep.entries) j["properties"].push_back({{"name", e.name}, {"passed", e.passed}, {"detail", e.detail}});
    out << json_text(j);
  } else {
    for (const auto& e : rep.entries) {
      out << (e.passed ? "PASS " : "FAIL ") << e.name;
      if (!e.detail.empty()) out << "  (" << e.detail << ")";
      out << "\n";
    }
  }
  return rep.passed() ? 0 : 1;
}

inline std::string version_text() {
  std::string s = std::string("hierlpr ") + kVersion + "\nalgorithms:";
  for (const auto& [a, name] : kAlgoRegistry) s += " " + std::string(name);
  return s + "\n";
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  cli::Options o;
  CLI::App app{"Hierarchy-consistent ranking of (sample, label) instances", "hierlpr"};
  app.fallthrough();
  app.add_flag("--version", o.version, "Print version and algorithm registry");
  app.add_flag("--json", o.json, "Print a JSON summary on stdout");
  app.add_option("--threads", o.threads, "Worker cap")->check(CLI::PositiveNumber);

  auto* rank_cmd = app.add_subcommand("rank", "Rank instances under a hierarchy");
  rank_cmd->add_option("--algo", o.algo, "naive, fast, cssa or brute");
  rank_cmd->add_option("--hierarchy", o.hierarchy, "Hierarchy CSV")->required();
  rank_cmd->add_option("--lpr", o.lpr, "LPR CSV")->required();
  rank_cmd->add_option("--out", o.out, "Ranking CSV (stdout when omitted)");
  rank_cmd->add_flag("--dag", o.dag, "Allow multi-parent labels via split enumeration");
  rank_cmd->add_option("--dag-out", o.dag_out, "Split sidecar JSON (default <out>.split.json)");
  rank_cmd->add_option("--split-cap", o.split_cap, "Maximum number of splits");

  auto* est_cmd = app.add_subcommand("estimate-lpr", "Fit per-label LPR curves");
  est_cmd->add_option("--train", o.train, "Training scores CSV with truth")->required();
  est_cmd->add_option("--apply", o.apply, "Scores CSV to convert (default: training scores)");
  est_cmd->add_option("--out", o.out, "LPR CSV (stdout when omitted)");
  est_cmd->add_option("--bandwidth", o.bandwidth, "Smoothing bandwidth on the percentile axis");
  est_cmd->add_option("--grid", o.grid, "Grid size")->check(CLI::Range(10, 1 << 20));
  est_cmd->add_option("--method", o.method, "smooth or ltdr");
  est_cmd->add_option("--labels", o.labels, "Number of labels (default: largest id + 1)");

  auto* curves_cmd = app.add_subcommand("curves", "Hit and PR curves of a ranking");
  curves_cmd->add_option("--ranking", o.ranking, "Ranking CSV")->required();
  curves_cmd->add_option("--truth", o.truth, "Scores CSV with a truth column")->required();
  curves_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* cut_cmd = app.add_subcommand("cutoff", "Choose an LPR cutoff on a ranking");
  cut_cmd->add_option("--ranking", o.ranking, "Ranking CSV to select on")->required();
  cut_cmd->add_option("--truth", o.truth, "Scores CSV with a truth column")->required();
  cut_cmd->add_option("--criterion", o.criterion, "maxf or precision");
  cut_cmd->add_option("--target", o.target, "Precision target");
  cut_cmd->add_option("--test-ranking", o.test_ranking, "Ranking CSV to evaluate the cutoff on");
  cut_cmd->add_option("--test-truth", o.test_truth, "Truth for the test ranking (default: --truth)");

  auto* sim_cmd = app.add_subcommand("simulate", "Synthetic replication study");
  sim_cmd->add_option("--setting", o.setting, "1, 2, 3 or 4");
  sim_cmd->add_option("--reps", o.reps, "Replications");
  sim_cmd->add_option("--seed", o.seed, "Base seed");
  sim_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* self_cmd = app.add_subcommand("selftest", "Worked examples and oracle checks");
  self_cmd->add_option("--trials", o.trials, "Random forests");
  self_cmd->add_option("--seed", o.seed, "Seed");
  self_cmd->add_flag("--corrupt-tie-rule", o.corrupt_tie_rule, "Debug: break ties the wrong way in the fast ranker");

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  if (o.version) {
    out << cli::version_text();
    return 0;
  }
  try {
    if (rank_cmd->parsed()) return cli::cmd_rank(o, out);
    if (est_cmd->parsed()) return cli::cmd_estimate(o, out);
    if (curves_cmd->parsed()) return cli::cmd_curves(o, out);
    if (cut_cmd->parsed()) return cli::cmd_cutoff(o, out);
    if (sim_cmd->parsed()) return cli::cmd_simulate(o, out);
    if (self_cmd->parsed()) return cli::cmd_selftest(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return cli::exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace hierlpr
